from enum import Enum

from lexxfer.errors import ConfigError


class StrEnum(str, Enum):
    """Base Enum class for string valued members, with config parsing helpers."""

    # The str mixin means members compare equal to their values and serialise to
    # JSON as plain strings. `str()` is overridden to match Python 3.11 StrEnum.
    def __str__(self) -> str:
        return self.value

    @classmethod
    def value_list(cls) -> list[str]:
        return [m.value for m in cls.__members__.values()]

    @classmethod
    def parse(cls, value: "str | StrEnum", aliases: dict[str, str] | None = None):
        """
        Resolve a user supplied value (member, value, or alias) to a member.

        :param value: The value to resolve.
        :param aliases: Optional map of alternative spellings to member values.
          Keys are compared after lowercasing and converting "-" and " " to "_".
        """
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            if value in cls._value2member_map_:
                return cls(value)
            if aliases:
                key = value.strip().lower().replace("-", "_").replace(" ", "_")
                if key in aliases:
                    return cls(aliases[key])
        raise ConfigError(
            f"Unknown {cls.__name__} value '{value}'. Must be one of: "
            f"{', '.join(cls.value_list())}"
        )
