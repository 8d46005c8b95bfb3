from __future__ import annotations

import numpy as np
import pytest

from robolabel.config import StreamDecl, ToolConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def make_config(tmp_path, **overrides) -> ToolConfig:
    """A valid baseline config; tests override what they exercise."""
    defaults = dict(
        dataset_format="reassemble",
        data_path=str(tmp_path / "data"),
        annotation_output_path=str(tmp_path / "out" / "annotations.json"),
        label_set=("grasp", "lift", "place"),
        annotator_id="ann1",
    )
    defaults.update(overrides)
    return ToolConfig(**defaults)


def decl(name: str, source: str, default_visible: bool = True) -> StreamDecl:
    return StreamDecl(name=name, source=source, default_visible=default_visible)
