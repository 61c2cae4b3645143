"""hazdispatch exceptions."""

from functools import wraps
from typing import Any, Callable, Optional, Tuple, Type, TypeVar


class HazDispatchError(Exception):
    """Base exception for all hazdispatch errors."""

    pass


class ConfigurationError(HazDispatchError):
    """Invalid scenario, fleet or solver configuration."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ValidationError(HazDispatchError):
    """Input validation errors."""

    pass


class ContractError(HazDispatchError):
    """A precondition of a pure operation was violated."""

    pass


class InstanceSizeError(HazDispatchError):
    """Instance too large for the exact solver."""

    def __init__(self, size: int, limit: int):
        super().__init__(
            f"Instance has {size} sites, exact solver limit is {limit}"
        )
        self.size = size
        self.limit = limit


class SolverError(HazDispatchError):
    """Routing solver failures."""

    pass


class ReportError(HazDispatchError):
    """Report aggregates inconsistent with their rows."""

    pass


F = TypeVar("F", bound=Callable[..., Any])


def wrap_errors(
    error_cls: Type[HazDispatchError],
    message: str,
    catch: Tuple[Type[BaseException], ...] = (Exception,),
) -> Callable[[F], F]:
    """Decorator re-raising foreign exceptions as package errors.

    Package errors pass through untouched.
    """

    def decorator(func: F) -> F:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except HazDispatchError:
                raise
            except catch as e:
                raise error_cls(f"{message}: {str(e)}") from e

        return wrapper  # type: ignore[return-value]

    return decorator
