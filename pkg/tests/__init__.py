"""Tests for the tube allocator."""
