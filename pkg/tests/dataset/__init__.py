"""Tests for the dataset module."""
