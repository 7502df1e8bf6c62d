"""Command-line interface for boxvote."""
