#  (c) Copyright 2026 skewmix authors. All rights reserved.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

import dataclasses
from typing import Any, Dict, Tuple, Union, get_type_hints

import tomli

from skewmix.core.errors import ConfigError


def dataclass_from_dict(klass: Any, dikt: Any, path: str = ""):
    """
    Builds `klass` from a raw TOML mapping, recursing into nested dataclasses,
    lists, tuples, dicts and Optionals. Any mismatch raises :class:`ConfigError`
    naming the dotted path of the offending field.
    """
    origin = getattr(klass, "__origin__", None)
    args = getattr(klass, "__args__", ())
    where = path or "<root>"

    if klass is Any:
        return dikt
    if origin is Union:
        if dikt is None and type(None) in args:
            return None
        errors = []
        for arg in (a for a in args if a is not type(None)):
            try:
                return dataclass_from_dict(arg, dikt, path)
            except ConfigError as exc:
                errors.append(exc.message)
        raise ConfigError(where, "; ".join(errors))
    if dataclasses.is_dataclass(klass):
        if not isinstance(dikt, dict):
            raise ConfigError(where, f"expected a table, got {type(dikt).__name__}")
        hints = get_type_hints(klass)
        names = {f.name for f in dataclasses.fields(klass)}
        unknown = sorted(set(dikt) - names)
        if unknown:
            raise ConfigError(_join(path, unknown[0]), "unknown field")
        try:
            return klass(
                **{
                    key: dataclass_from_dict(hints[key], value, _join(path, key))
                    for key, value in dikt.items()
                }
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(where, str(exc)) from exc
    if origin in (list, tuple):
        if not isinstance(dikt, (list, tuple)):
            raise ConfigError(where, f"expected a list, got {type(dikt).__name__}")
        item_type = args[0] if args else Any
        items = [
            dataclass_from_dict(item_type, item, f"{where}[{index}]")
            for index, item in enumerate(dikt)
        ]
        return tuple(items) if origin is tuple else items
    if origin is dict:
        if not isinstance(dikt, dict):
            raise ConfigError(where, f"expected a table, got {type(dikt).__name__}")
        value_type = args[1] if len(args) == 2 else Any
        return {
            key: dataclass_from_dict(value_type, value, _join(path, key))
            for key, value in dikt.items()
        }
    if klass is float:
        if isinstance(dikt, bool) or not isinstance(dikt, (int, float)):
            raise ConfigError(where, f"expected a number, got {dikt!r}")
        return float(dikt)
    if klass is int:
        if isinstance(dikt, bool) or not isinstance(dikt, int):
            raise ConfigError(where, f"expected an integer, got {dikt!r}")
        return dikt
    if klass in (bool, str) and not isinstance(dikt, klass):
        raise ConfigError(where, f"expected a {klass.__name__}, got {dikt!r}")
    return dikt


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def parse_override(override: str) -> Tuple[str, Any]:
    """
    Splits `a.b.c=value`; the value is read as a TOML literal when possible
    (numbers, booleans, arrays, quoted strings) and kept verbatim otherwise.
    """
    key, sep, raw = override.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(override, "overrides must look like key.path=value")
    try:
        value = tomli.loads(f"value = {raw.strip()}")["value"]
    except tomli.TOMLDecodeError:
        value = raw.strip()
    return key, value


def set_dotted(document: Dict[str, Any], key: str, value: Any) -> None:
    node = document
    parts = key.split(".")
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(key, f"'{part}' is not a table")
        node = child
    node[parts[-1]] = value


def alias(ignore_case=False):
    class Alias:
        def __init__(self):
            self._aliases = {}
            self._descriptions = {}

        def alias(self, *aliases: str, description: str = ""):
            def _decorator(obj):
                for _alias in aliases:
                    key = _alias.lower() if ignore_case else _alias
                    self._aliases[key] = obj
                    self._descriptions[key] = description
                return obj

            return _decorator

        def __getitem__(self, item):
            return self._aliases[item.lower() if ignore_case else item]

        def __contains__(self, item):
            return (item.lower() if ignore_case else item) in self._aliases

        def describe(self):
            return sorted(self._descriptions.items())

    return Alias()
