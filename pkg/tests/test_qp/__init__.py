"""Tests for the qp package."""
