"""Constants shared by both kernel backends: parameter-vector slots, violation bits, templates."""

ACTION_FIELDS = (
    "pv_to_load", "battery_charge", "battery_discharge", "grid_import",
    "grid_export", "genset_power", "load_shed", "pv_curtailed",
)

# slots of the float64 parameter vector describing one microgrid
CAP, PCH, PDIS, EFF, SOC_LO, SOC_HI = 0, 1, 2, 3, 4, 5
HAS_GEN, GEN_RATED, GEN_MIN, FUEL = 6, 7, 8, 9
HAS_GRID, IMP_MAX, EXP_MAX = 10, 11, 12
SHED_PRICE, CURT_PRICE, DT = 13, 14, 15
N_PARAMS = 16

# violation bits
NEGATIVE = 1
SIMULTANEOUS = 2
BAL_LOAD = 4
BAL_PV = 8
BATT_POWER = 16
BATT_SOC = 32
GRID_DOWN = 64
GRID_LIMIT = 128
GEN_LIMIT = 256
NONEXISTENT = 512

VIOLATION_TAGS = (
    (NEGATIVE, "NegativeCommand"),
    (SIMULTANEOUS, "SimultaneousCharge"),
    (BAL_LOAD, "PowerBalanceLoad"),
    (BAL_PV, "PowerBalancePV"),
    (BATT_POWER, "BatteryPowerLimit"),
    (BATT_SOC, "BatterySOCLimit"),
    (GRID_DOWN, "GridDown"),
    (GRID_LIMIT, "GridLimit"),
    (GEN_LIMIT, "GensetLimit"),
    (NONEXISTENT, "NonexistentAsset"),
)

TOL = 1e-6  # kW / kWh tolerance for balance and limit checks
DROP = 1e-13  # tableau entries below this after a pivot are zeroed

# deficit sources and surplus sinks used by the action templates
DIS, IMP, GEN = 0, 1, 2
CH, EXP = 0, 1

TEMPLATE_NAMES = (
    "battery-priority",
    "genset-priority",
    "grid-priority",
    "charge-from-pv",
    "charge-from-grid",
    "export-surplus",
    "idle",
    "shed-remainder",
)
N_TEMPLATES = len(TEMPLATE_NAMES)

DEFICIT_ORDER = (
    (DIS, IMP, GEN),
    (GEN, IMP, DIS),
    (IMP, DIS, GEN),
    (IMP, GEN, -1),
    (IMP, GEN, -1),
    (DIS, IMP, GEN),
    (IMP, GEN, -1),
    (DIS, -1, -1),
)
SURPLUS_ORDER = (
    (CH, EXP),
    (CH, EXP),
    (CH, EXP),
    (CH, EXP),
    (EXP, -1),
    (EXP, CH),
    (EXP, -1),
    (CH, EXP),
)
