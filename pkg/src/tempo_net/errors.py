class BudgetExceeded(RuntimeError):
    """An exploration ran out of its state, depth or iteration budget.

    Never a verdict: callers must report it separately from "no solution".
    """

    def __init__(self, what: str, explored: int = 0):
        self.explored = explored
        super().__init__(f"{what} (explored {explored} states)")
