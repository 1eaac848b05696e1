"""Tests for the methods package."""
