"""Allow running as python -m popgraph."""

from .main import main

if __name__ == "__main__":
    main()
