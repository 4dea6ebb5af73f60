"""Exception types shared across the package."""


class ScenarioTestError(Exception):
    """Base class for all errors raised by scenariotest."""


class UnknownTemplate(ScenarioTestError, KeyError):
    def __init__(self, template_id):
        super().__init__(template_id)
        self.template_id = template_id

    def __str__(self):
        return f"unknown scenario template {self.template_id!r}"


class InvalidTemplate(ScenarioTestError, ValueError):
    pass


class DuplicateName(ScenarioTestError, ValueError):
    pass


class InvalidBindings(ScenarioTestError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UnknownController(ScenarioTestError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown controller {self.name!r}"


class NonFiniteCommand(ScenarioTestError, ValueError):
    """A controller returned NaN or infinity.

    ``frames`` holds the world states simulated before the bad command.
    """

    def __init__(self, message, step=None, frames=None):
        super().__init__(message)
        self.step = step
        self.frames = frames


class NoOtherActors(ScenarioTestError, ValueError):
    pass


class EmptyTrace(ScenarioTestError, ValueError):
    pass


class BadPopulationSize(ScenarioTestError, ValueError):
    pass


class UnevaluatedMember(ScenarioTestError, ValueError):
    pass


class FramesUnavailable(ScenarioTestError, RuntimeError):
    pass


class InvalidCampaign(ScenarioTestError, ValueError):
    pass
