"""Tests for the models module."""
