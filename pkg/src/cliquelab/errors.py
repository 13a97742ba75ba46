class BudgetExceeded(ValueError):
    """An enumeration or search ran past its configured budget."""
