"""Tests for the nn module."""
