# main.py
"""
Prosumer QAOA Toolkit - CLI Interface
Transforms prosumer scheduling instances into QUBO / Ising form and solves them.

    python main.py transform data/fixture_a.json --emit ising
    python main.py solve data/fixture_a.json --method qaoa --reps 3 --restarts 10 --seed 7
    python main.py enumerate data/fixture_a.json
    python main.py bench --hours 3,4,5 --reps 1,3
    python main.py verify data/fixture_a.json
"""

from src.cli import main


if __name__ == "__main__":
    main()
