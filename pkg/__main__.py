
"""
Entry point for python -m.
"""
from interfaces.cli import cli

if __name__ == '__main__':
    cli()
