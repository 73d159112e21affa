"""Tests for the train module."""
