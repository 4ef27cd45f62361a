"""Layered configuration: defaults, files, environment and overrides."""
import configparser
import json
import os
import re
from pathlib import Path

import toml

_INTERPOLATE = re.compile(r'\$\{([A-Za-z_][A-Za-z0-9_.]*)(?::-([^}]*))?\}')


class ConfigError(Exception):
    pass


def deep_merge(base, override):
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def parse_scalar(text):
    low = text.strip().lower()
    if low in ('true', 'yes', 'on'):
        return True
    if low in ('false', 'no', 'off'):
        return False
    if low in ('null', 'none', ''):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.startswith('[') or text.startswith('{'):
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            pass
    return text


class Config:
    def __init__(self, defaults=None, env_prefix='APP_', separator='__'):
        self.env_prefix = env_prefix
        self.separator = separator
        self._layers = [('defaults', defaults or {})]
        self._cache = None

    def load_file(self, path, required=True):
        path = Path(path)
        if not path.exists():
            if required:
                raise ConfigError('config file %s not found' % path)
            return self
        suffix = path.suffix.lower()
        text = path.read_text(encoding='utf-8')
        if suffix == '.json':
            data = json.loads(text)
        elif suffix == '.toml':
            data = toml.loads(text)
        elif suffix in ('.ini', '.cfg'):
            parser = configparser.ConfigParser()
            parser.read_string(text)
            data = {s: {k: parse_scalar(v) for k, v in parser.items(s)} for s in parser.sections()}
        else:
            raise ConfigError('unsupported config format %s' % suffix)
        if not isinstance(data, dict):
            raise ConfigError('%s must contain a mapping at top level' % path)
        self._layers.append((str(path), data))
        self._cache = None
        return self

    def load_env(self, environ=None):
        environ = os.environ if environ is None else environ
        data = {}
        for key, value in environ.items():
            if not key.startswith(self.env_prefix):
                continue
            parts = key[len(self.env_prefix):].lower().split(self.separator)
            node = data
            for part in parts[:-1]:
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise ConfigError('environment key %s conflicts with a scalar' % key)
            node[parts[-1]] = parse_scalar(value)
        self._layers.append(('environment', data))
        self._cache = None
        return self

    def override(self, **values):
        self._layers.append(('override', values))
        self._cache = None
        return self

    def resolved(self):
        if self._cache is None:
            merged = {}
            for _, layer in self._layers:
                merged = deep_merge(merged, layer)
            self._cache = self._interpolate(merged, merged, depth=0)
        return self._cache

    def _interpolate(self, node, root, depth):
        if depth > 10:
            raise ConfigError('interpolation nested too deeply')
        if isinstance(node, dict):
            return {k: self._interpolate(v, root, depth) for k, v in node.items()}
        if isinstance(node, list):
            return [self._interpolate(v, root, depth) for v in node]
        if isinstance(node, str):
            def replace(match):
                value = self.lookup(match.group(1), root)
                if value is None:
                    if match.group(2) is not None:
                        return match.group(2)
                    raise ConfigError('undefined reference ${%s}' % match.group(1))
                return str(self._interpolate(value, root, depth + 1))
            return _INTERPOLATE.sub(replace, node)
        return node

    @staticmethod
    def lookup(dotted, root):
        node = root
        for part in dotted.split('.'):
            if not isinstance(node, dict) or part not in node:
                return None
            node = node[part]
        return node

    def get(self, dotted, default=None):
        value = self.lookup(dotted, self.resolved())
        return default if value is None else value

    def require(self, *keys):
        missing = [k for k in keys if self.get(k) is None]
        if missing:
            raise ConfigError('missing required settings: %s' % ', '.join(missing))

    def sources(self):
        return [name for name, _ in self._layers]
