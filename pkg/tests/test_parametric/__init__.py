"""Tests for the parametric package."""
