"""Default configuration for grid homology runs."""

# State-space guard (index 8 is 40320 states)
max_grid_index = 8
allow_large = False  # indices 9 and 10 need this; 11 and above are refused

# Parallelism
threads = 0  # 0 = one worker per CPU; GRIDHOM_THREADS overrides

# Reports
output = None  # None writes to stdout
format = "json"
timings = False  # per-check seconds make reports differ between runs

# Invariants
epsilon_mode = "robust"

# Verification
verify_max_n = 6
seed = 42

# inspect-ai task model (no model calls are made)
model = "mockllm/model"
