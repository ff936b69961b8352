"""Reference table of (m1, g1, g2, m2, eta) for seven activations at three scales.

These are the published six-decimal values the `table --golden` check
compares against. Several rows disagree with exact identities (for example
sigmoid m1 must equal 1/2 by symmetry and tanh eta must equal sigma^2 g1 > 0),
so a faithful computation does not reproduce them.
"""

GOLDEN_SIGMAS = (0.5, 1.0, 2.0)
GOLDEN_ACTIVATIONS = ("gelu", "mish", "relu", "sigmoid", "swish", "telu", "tanh")

GOLDEN = {
    ("gelu", 0.5): (0.078705, 0.560728, 0.716004, 0.102417, 0.088375),
    ("gelu", 1.0): (0.229535, 0.655422, 0.829161, 0.410407, 0.309361),
    ("gelu", 2.0): (0.794778, 0.803135, 0.971443, 2.534501, 1.706378),
    ("mish", 0.5): (0.037931, 0.529727, 0.675529, 0.067732, 0.053261),
    ("mish", 1.0): (0.138359, 0.587324, 0.745941, 0.298913, 0.213463),
    ("mish", 2.0): (0.526027, 0.669024, 0.832409, 1.674367, 1.129282),
    ("relu", 0.5): (0.199471, 0.500000, 0.707107, 0.125000, 0.125000),
    ("relu", 1.0): (0.398942, 0.500000, 0.707107, 0.500000, 0.500000),
    ("relu", 2.0): (0.797885, 0.500000, 0.707107, 2.000000, 2.000000),
    ("sigmoid", 0.5): (0.609165, 0.227240, 0.241773, 0.385227, 0.155856),
    ("sigmoid", 1.0): (0.634138, 0.205048, 0.218945, 0.420910, 0.138774),
    ("sigmoid", 2.0): (0.654555, 0.177440, 0.191129, 0.454353, 0.118889),
    ("swish", 0.5): (0.148339, 0.534417, 0.683651, 0.118357, 0.101652),
    ("swish", 1.0): (0.297860, 0.590914, 0.753031, 0.518031, 0.366017),
    ("swish", 2.0): (0.714726, 0.680503, 0.847785, 2.517363, 1.701491),
    ("telu", 0.5): (0.148819, 0.532392, 0.678362, 0.121239, 0.103339),
    ("telu", 1.0): (0.301344, 0.589837, 0.748729, 0.528505, 0.372810),
    ("telu", 2.0): (0.723683, 0.680302, 0.843873, 2.569972, 1.733705),
    ("tanh", 0.5): (0.000000, 0.788467, 0.864822, 0.229023, 0.000000),
    ("tanh", 1.0): (0.000000, 0.635317, 0.745041, 0.635261, 0.000000),
    ("tanh", 2.0): (0.000000, 0.458381, 0.589077, 0.861237, 0.000000),
}

GOLDEN_TOLERANCE = 1e-5
