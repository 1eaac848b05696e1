"""Tests for the grid package."""
