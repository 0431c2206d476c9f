"""Frozen reference values for the canonical instance (exact strings)."""

# The full 10x10 augmented game at dummy margin 1/2700, frozen entry by
# entry; construction must reproduce it exactly.
AUGMENTED_MATRIX_REFERENCE = [
    ["0", "-215689/2700", "-15274/225", "-215687/2700", "-1/1350",
     "-4087/108", "-11329/900", "-52063/900", "-53897/675", "-137287/2700"],
    ["215689/2700", "0", "-1", "1", "-71/900", "-3/50", "-1/12",
     "71/900", "3/50", "1/12"],
    ["15274/225", "1", "0", "-1", "-3/50", "-7/300", "-1/36",
     "3/50", "7/300", "1/36"],
    ["215687/2700", "-1", "1", "0", "-1/12", "-1/36", "-1/18",
     "1/12", "1/36", "1/18"],
    ["1/1350", "71/900", "3/50", "1/12", "0", "-1", "1",
     "-71/900", "-3/50", "-1/12"],
    ["4087/108", "3/50", "7/300", "1/36", "1", "0", "-1",
     "-3/50", "-7/300", "-1/36"],
    ["11329/900", "1/12", "1/36", "1/18", "-1", "1", "0",
     "-1/12", "-1/36", "-1/18"],
    ["52063/900", "-71/900", "-3/50", "-1/12", "71/900", "3/50", "1/12",
     "0", "-1", "1"],
    ["53897/675", "-3/50", "-7/300", "-1/36", "3/50", "7/300", "1/36",
     "1", "0", "-1"],
    ["137287/2700", "-1/12", "-1/36", "-1/18", "1/12", "1/36", "1/18",
     "-1", "1", "0"],
]

# The reference utility-stack matrices (27ths / 2700ths), which the
# derivation from (B, Delta, Q0, Q1) must reproduce.
V1_REFERENCE_27THS = [[54, 406, 0], [54, 406, -324], [54, 82, 324]]
V2_REFERENCE_2700THS = [[-16200, -67700, -85787],
                        [-5400, -8300, -53813],
                        [-10800, -70400, -54500]]
V3_REFERENCE_27THS = [[54, 190, -379], [54, 406, -1], [54, -26, -352]]
