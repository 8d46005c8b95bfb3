/** Typed client for the annotation gateway HTTP API.
 *
 * Every call goes through global fetch so tests can substitute a fake
 * gateway. The client never interprets annotation bytes beyond JSON
 * parsing; the server's response body is the source of truth.
 */

export interface StreamDecl {
  name: string;
  source: string;
  default_visible: boolean;
}

export interface GatewayConfig {
  dataset_format: string;
  dataset: string;
  annotator_id: string;
  label_set: string[];
  /** action name -> lowercased key string, one key per action */
  shortcuts: Record<string, string>;
  nav_fast_step: number;
  nav_slow_step: number;
  video_fps: number | null;
  cameras: StreamDecl[];
  channels: StreamDecl[];
}

export interface EpisodeSummary {
  id: string;
  duration: number | null;
}

export interface CameraMeta {
  name: string;
  frame_count: number;
}

export interface ChannelMeta {
  name: string;
  dims: number;
  sample_count: number;
  unit: string | null;
  dim_labels: string[];
  default_visible: boolean;
}

export interface EpisodeMeta {
  id: string;
  duration: number;
  description: string | null;
  cameras: CameraMeta[];
  channels: ChannelMeta[];
}

export interface SeriesResponse {
  channel: string;
  dims: number;
  from_t: number;
  to_t: number;
  downsampled: boolean;
  points: number[][];
}

export interface Segment {
  start: number;
  end: number;
  label: string;
  success: boolean;
}

export interface EpisodeRecord {
  description?: string;
  segments: Segment[];
}

/** One entry of a FastAPI 422 body; loc pinpoints the offending field. */
export interface ValidationItem {
  loc: (string | number)[];
  msg: string;
  type: string;
}

export class GatewayError extends Error {
  status: number;
  detail: ValidationItem[] | string;

  constructor(status: number, detail: ValidationItem[] | string) {
    super(typeof detail === "string" ? detail : detail.map((d) => d.msg).join("; "));
    this.status = status;
    this.detail = detail;
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail: ValidationItem[] | string = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && body.detail !== undefined) detail = body.detail;
  } catch {
    // non-JSON error body, keep the generic message
  }
  throw new GatewayError(resp.status, detail);
}

export class ApiClient {
  base: string;

  constructor(base = "") {
    this.base = base;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.base + path);
    await raiseForStatus(resp);
    return (await resp.json()) as T;
  }

  config(): Promise<GatewayConfig> {
    return this.getJson("/api/config");
  }

  episodes(): Promise<EpisodeSummary[]> {
    return this.getJson("/api/episodes");
  }

  episodeMeta(id: string): Promise<EpisodeMeta> {
    return this.getJson(`/api/episodes/${encodeURIComponent(id)}/meta`);
  }

  frameUrl(id: string, camera: string, t: number): string {
    const ep = encodeURIComponent(id);
    const cam = encodeURIComponent(camera);
    return `${this.base}/api/episodes/${ep}/frame?camera=${cam}&t=${t}`;
  }

  series(id: string, channel: string, fromT: number, toT: number, maxPoints = 2000): Promise<SeriesResponse> {
    const ep = encodeURIComponent(id);
    const ch = encodeURIComponent(channel);
    return this.getJson(`/api/episodes/${ep}/series?channel=${ch}&from=${fromT}&to=${toT}&max_points=${maxPoints}`);
  }

  async annotations(id: string): Promise<EpisodeRecord> {
    return this.getJson(`/api/episodes/${encodeURIComponent(id)}/annotations`);
  }

  /** PUT the full episode record; resolves to the canonical echo. */
  async putAnnotations(id: string, record: EpisodeRecord): Promise<EpisodeRecord> {
    const resp = await fetch(`${this.base}/api/episodes/${encodeURIComponent(id)}/annotations`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
    await raiseForStatus(resp);
    return (await resp.json()) as EpisodeRecord;
  }
}
