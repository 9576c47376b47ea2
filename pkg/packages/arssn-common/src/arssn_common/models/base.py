from os import PathLike
from pathlib import Path
from typing import IO, Annotated, Any, Self

import yaml
from pydantic import AfterValidator
from pydantic.types import PathType
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

FilePath = Annotated[Path, AfterValidator(lambda v: v.expanduser()), PathType("file")]


def load_yaml_mapping(path: str | PathLike) -> dict[str, Any]:
    """Read a YAML file whose top level is a mapping; an empty file reads as {}."""
    with open(path, encoding="utf-8") as f:
        content = yaml.safe_load(f)
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ValueError(f"{path}: expected a mapping at the top level, got {type(content).__name__}")
    return content


class IgnoringBaseSettings(BaseSettings):
    """
    Settings read from a YAML file; environment variables prefixed with ARSSN_ take precedence
    (nested fields separated by a double underscore, e.g. ARSSN_OPTS__GRAD_TOL).
    """

    model_config = SettingsConfigDict(
        extra="ignore",
        validate_assignment=True,
        use_enum_values=True,
        env_nested_delimiter="__",
        env_prefix="arssn_",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # file values arrive as init kwargs; the environment overrides them
        return env_settings, init_settings, dotenv_settings, file_secret_settings

    def to_yaml(self, fd: IO[str], resolved: bool = False) -> None:
        """
        Write the settings as YAML.

        :param resolved: Include every field, defaults included, so the file alone reproduces the settings.
        """
        if resolved:
            content = self.model_dump(mode="json")
        else:
            content = self.model_dump(mode="json", exclude_none=True, exclude_unset=True, exclude_defaults=True)
        yaml.safe_dump(content, fd, sort_keys=False)

    @classmethod
    def from_path(cls, path: str | PathLike) -> Self:
        """Read a YAML file and validate it against the settings schema."""
        return cls(**load_yaml_mapping(path))
