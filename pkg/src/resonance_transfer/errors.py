"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class PoleError(DomainError):
    """Real-frequency evaluation exactly at an undamped resonance."""


class OscillatorInstabilityError(ArithmeticError):
    """Coupled oscillator pair has no real normal-mode frequency."""


class StrongCouplingError(ArithmeticError):
    """The argument of ``ln(1 + alpha*T)`` left the positive axis.

    Raised when the atoms sit so close that the logarithmic
    resonance formula is no longer defined.
    """

    def __init__(self, message, *, n=None, xi=None, rho=None):
        super().__init__(message)
        self.n = n
        self.xi = xi
        self.rho = rho

    def __reduce__(self):
        # keep n / xi / rho when crossing a process boundary
        return (_rebuild_strong_coupling, (self.args[0], self.n, self.xi, self.rho))


def _rebuild_strong_coupling(message, n, xi, rho):
    return StrongCouplingError(message, n=n, xi=xi, rho=rho)


class ConfigError(ValueError):
    """Malformed scan configuration; ``line`` is 1-based when known."""

    def __init__(self, message, *, path=None, line=None, key=None):
        self.path = path
        self.line = line
        self.key = key
        self.detail = message
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        super().__init__(where + message)
