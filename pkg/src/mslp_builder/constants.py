default_verbosity = 1
max_verbosity = 3

default_mode = 'full'
modes = ('step2', 'full')

# Largest field order accepted by make_field.
max_field_order = 2 ** 20
# Smallest dimension the standard generators are defined for.
min_dimension = 3

program_magic = 'MSLP v1'

# Memory layout Y used by the Bruhat programs.
generator_slots = {
    's': 1,
    's_inv': 2,
    't': 3,
    't_inv': 4,
    'delta': 5,
    'delta_inv': 6,
    'v': 7,
    'v_inv': 8,
    'x': 9,
    'x_inv': 10,
}
payload_slots = {
    'w': 11,
    'u1': 12,
    'u2': 13,
}
memory_layout_size = len(generator_slots) + len(payload_slots)

# Multiple of d^2 * log2(q) the total program length stays under.
length_ratio_limit = 20

# Above this dimension bench skips re-evaluating the emitted programs by default.
eval_dim_limit = 64

default_seed = 1
default_bench_trials = 5
default_bench_definition = 'sweep.yml'

# Known measurements printed next to bench results for comparison.
reference_runs = {
    (250, 2): {'length': 525394, 'slots': 25},
}
