"""Tests for the events module."""
