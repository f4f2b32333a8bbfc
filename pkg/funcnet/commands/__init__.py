"""
Command-line subcommands
"""
