"""Module entrypoint: `python -m tabletop_pose`."""

from tabletop_pose.cli import main

if __name__ == "__main__":
    main()
