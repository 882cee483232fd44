import sys
from pointerwork.cli import main

# e.g. python run_experiment.py decay --config configs/demo.yaml --out results/demo/
sys.exit(main())
