"""Tests for the rcdcre package."""
