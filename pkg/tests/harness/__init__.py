"""Fixture writers and brute-force oracles, independent of the package code."""
