"""Export the bundled EBS fixture as a project directory."""

import sys

from . import export_project


def main(argv: list[str]) -> int:
    if len(argv) != 1:
        print("usage: python -m safescope.fixtures DEST_DIR", file=sys.stderr)
        return 2
    dest = export_project(argv[0])
    print(f"fixture project written to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
