"""Exception types raised across the package.

Every error carries a human-readable message; loaders report positions
(line numbers, word keys) so bad input files can be fixed directly.
"""


class LexiscopeError(Exception):
    """Base class for all package errors."""


# corpus
class MalformedLine(LexiscopeError):
    def __init__(self, path, lineno, detail):
        super().__init__(f"{path}:{lineno}: {detail}")
        self.path = str(path)
        self.lineno = lineno


class DuplicateEntry(LexiscopeError):
    pass


class UnknownPos(LexiscopeError):
    pass


class UnknownWord(LexiscopeError):
    pass


class PosMismatch(LexiscopeError):
    pass


class DuplicateSource(LexiscopeError):
    pass


class TooFewPairs(LexiscopeError):
    pass


# numerics
class DimensionMismatch(LexiscopeError):
    pass


class TooFewPoints(LexiscopeError):
    pass


class DimensionTooLarge(LexiscopeError):
    pass


# features
class BadBinCount(LexiscopeError):
    pass


class ImageTooSmall(LexiscopeError):
    pass


class TooFewDescriptors(LexiscopeError):
    pass


class OovWord(LexiscopeError):
    pass


class SetMismatch(LexiscopeError):
    pass


class BadMagic(LexiscopeError):
    pass


class CountMismatch(LexiscopeError):
    pass


class NonFiniteValue(LexiscopeError):
    pass


class BadImageFile(LexiscopeError):
    pass


# similarity
class EmptySet(LexiscopeError):
    pass


class TooFewImages(LexiscopeError):
    pass


# ranker
class SingleClassData(LexiscopeError):
    pass


class UnresolvablePair(LexiscopeError):
    pass


# eval
class MissingGold(LexiscopeError):
    pass


class GoldNotInCandidates(LexiscopeError):
    pass


class InsufficientOverlap(LexiscopeError):
    pass


# synth
class BadConfig(LexiscopeError):
    pass
