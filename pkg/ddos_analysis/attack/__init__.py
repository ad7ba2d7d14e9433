from ddos_analysis.attack.labeled import LABELED_COLUMNS, LabeledDataset, check_window, inject, inject_many
from ddos_analysis.attack.scenario import (
    AttackCombination,
    AttackScenario,
    check_attack_properties,
    combination_grid,
    daily_scenarios,
    scenario_grid,
)

__all__ = [
    "LABELED_COLUMNS",
    "AttackCombination",
    "AttackScenario",
    "LabeledDataset",
    "check_attack_properties",
    "check_window",
    "combination_grid",
    "daily_scenarios",
    "inject",
    "inject_many",
    "scenario_grid",
]
