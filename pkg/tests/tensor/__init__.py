"""Tests for the tensor module."""
