"""Variable catalogs.

The bundled financial catalog lists the 18 firm-level variables in the
order used by the triplet-extraction schema; that order is also the node
index order everywhere else in the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


@dataclass(frozen=True)
class VariableCatalog:
    names: tuple[str, ...]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if any(not isinstance(n, str) or not n for n in names):
            raise ValueError("variable names must be non-empty strings")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "index", {n: i for i, n in enumerate(names)})

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self.index

    def idx(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def name(self, i: int) -> str:
        return self.names[i]


EXOGENOUS = (
    "China_Revenue_Percent",
    "US_Revenue_Percent",
    "Europe_Revenue_Percent",
    "Governance_Score",
    "Supplier_Concentration",
    "Customer_Concentration",
    "Carbon_Emissions_Score",
)
EVENTS = ("M_and_A_Event", "Major_Product_Launch", "Regulatory_Change_Event")
RISKS = (
    "Supply_Chain_Risk_Score",
    "Cyber_Risk_Score",
    "Regulatory_Risk_Score",
    "Market_Risk_Score",
)
OUTCOMES = ("Revenue_Growth_YoY", "EBITDA_Margin", "Debt_to_Equity", "Monthly_Return")

FINANCIAL_CATALOG = VariableCatalog(
    [
        "China_Revenue_Percent",
        "US_Revenue_Percent",
        "Europe_Revenue_Percent",
        "Governance_Score",
        "M_and_A_Event",
        "Major_Product_Launch",
        "Regulatory_Change_Event",
        "Supplier_Concentration",
        "Customer_Concentration",
        "Supply_Chain_Risk_Score",
        "Cyber_Risk_Score",
        "Carbon_Emissions_Score",
        "Regulatory_Risk_Score",
        "Revenue_Growth_YoY",
        "EBITDA_Margin",
        "Market_Risk_Score",
        "Debt_to_Equity",
        "Monthly_Return",
    ]
)

# exogenous -> events -> risks -> outcomes
CAUSAL_TIERS: dict[str, int] = {
    **{n: 0 for n in EXOGENOUS},
    **{n: 1 for n in EVENTS},
    **{n: 2 for n in RISKS},
    **{n: 3 for n in OUTCOMES},
}

DEFAULT_TARGETS = ("Monthly_Return", "Revenue_Growth_YoY", "EBITDA_Margin")


def tiers_for(catalog: VariableCatalog) -> list[int]:
    """Tier per variable; names outside the financial groups share tier 0."""
    return [CAUSAL_TIERS.get(n, 0) for n in catalog.names]
