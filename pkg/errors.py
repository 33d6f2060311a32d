class SimulationError(Exception):
    exit_code = 1


class ConfigError(SimulationError):
    exit_code = 2


class InvalidParametersError(ConfigError):
    def __init__(self, report):
        self.report = report
        super().__init__("invalid parameters: " + "; ".join(f"{i.code}: {i.message}" for i in report.errors))


class UnstableParametersError(SimulationError):
    exit_code = 3

    def __init__(self, report):
        self.report = report
        super().__init__("unstable parameters: " + "; ".join(f"{i.code}: {i.message}" for i in report.errors))


class DegenerateParametersError(SimulationError):
    exit_code = 3

    def __init__(self, condition_number: float, limit: float):
        self.condition_number = condition_number
        super().__init__(f"linear system is near singular (condition number {condition_number:.3e} > {limit:.1e})")


class OutputError(SimulationError):
    exit_code = 4


class DomainError(ValueError):
    pass
