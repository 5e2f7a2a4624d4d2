"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can report a category per
error family without inspecting messages.
"""


class SemcomError(Exception):
    exit_code = 1


# -- belief arithmetic -------------------------------------------------------

class BeliefError(SemcomError, ValueError):
    exit_code = 10


class NonPositiveCost(BeliefError):
    pass


class EmptyCostVector(BeliefError):
    pass


class EmptyDescription(BeliefError):
    pass


class EmptyEpisode(BeliefError):
    pass


class LengthBelowMinimum(BeliefError):
    pass


class CardinalityOutOfRange(BeliefError):
    pass


# -- environment -------------------------------------------------------------

class EnvironmentError_(SemcomError):
    exit_code = 20


class InconsistentConfig(EnvironmentError_, ValueError):
    pass


class UnknownEvent(EnvironmentError_, LookupError):
    pass


class UnknownTask(EnvironmentError_, LookupError):
    pass


class NonAbsorbing(EnvironmentError_):
    pass


class EpisodeNotActive(EnvironmentError_):
    pass


class ScenarioFormatError(EnvironmentError_, ValueError):
    pass


# -- learner -----------------------------------------------------------------

class LearnerError(SemcomError):
    exit_code = 30


class UnknownStateAction(LearnerError, LookupError):
    pass


class DegenerateBeliefSet(LearnerError, ValueError):
    pass


class CardinalityMismatch(LearnerError, ValueError):
    pass


class ActionNotSubset(LearnerError, ValueError):
    pass


class EmptyResult(LearnerError, ValueError):
    pass


class ActionSpaceTooLarge(LearnerError):
    pass


# -- harness -----------------------------------------------------------------

class ConfigError(SemcomError, ValueError):
    exit_code = 40


class MissingFile(ConfigError, FileNotFoundError):
    pass


class UnknownKey(ConfigError, LookupError):
    pass


class DuplicateKey(UnknownKey):
    pass


class RangeViolation(ConfigError):
    def __init__(self, key, message=""):
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class HarnessError(SemcomError):
    exit_code = 50


class EmptySeries(HarnessError, ValueError):
    pass


class SeedMismatch(HarnessError, ValueError):
    pass


class UnvisitedEvent(UserWarning):
    """Warning: an event had too few visits to extract a pruning set."""
