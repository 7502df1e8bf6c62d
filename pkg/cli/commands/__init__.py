"""Subcommand modules, one per command family."""
