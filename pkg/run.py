#!/usr/bin/env python3
"""Run the FairMetric command line.

Examples:
- python run.py measure --beta -1 --input data/samples.csv
- python run.py sweep --beta-grid -10:0.25:5 --input data/samples.csv
- python run.py verify --suite all --seed 7
"""

from src.main import main

if __name__ == "__main__":
    main()
