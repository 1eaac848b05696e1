"""Tests for mopf."""
