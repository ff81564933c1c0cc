"""Helpers shared by the config readers."""
