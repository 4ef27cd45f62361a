"""Schema-driven CSV import with type coercion and row-level error reporting."""
import csv
import datetime
import io
import logging
import re
from collections import Counter, namedtuple

import pandas as pd

logger = logging.getLogger(__name__)

RowError = namedtuple('RowError', 'line column message')
TRUE_WORDS = {'1', 'true', 'yes', 'y', 'on', 't'}
FALSE_WORDS = {'0', 'false', 'no', 'n', 'off', 'f'}


class SchemaError(Exception):
    pass


class ColumnSpec:
    def __init__(self, name, kind='str', required=False, default=None, choices=None, pattern=None, aliases=()):
        if kind not in ('str', 'int', 'float', 'bool', 'date'):
            raise SchemaError('unsupported column type %s' % kind)
        self.name = name
        self.kind = kind
        self.required = required
        self.default = default
        self.choices = set(choices) if choices else None
        self.pattern = re.compile(pattern) if pattern else None
        self.aliases = {a.lower() for a in aliases} | {name.lower()}

    def coerce(self, raw):
        text = (raw or '').strip()
        if not text:
            if self.required:
                raise ValueError('missing required value')
            return self.default
        if self.kind == 'int':
            value = int(text.replace(',', ''))
        elif self.kind == 'float':
            value = float(text.replace(',', ''))
        elif self.kind == 'bool':
            low = text.lower()
            if low in TRUE_WORDS:
                value = True
            elif low in FALSE_WORDS:
                value = False
            else:
                raise ValueError('not a boolean: %r' % text)
        elif self.kind == 'date':
            value = None
            for fmt in ('%Y-%m-%d', '%d/%m/%Y', '%Y%m%d'):
                try:
                    value = datetime.datetime.strptime(text, fmt).date()
                    break
                except ValueError:
                    continue
            if value is None:
                raise ValueError('unrecognized date %r' % text)
        else:
            value = text
        if self.choices is not None and value not in self.choices:
            raise ValueError('%r is not one of %s' % (value, sorted(self.choices)))
        if self.pattern is not None and not self.pattern.match(str(value)):
            raise ValueError('%r does not match %s' % (value, self.pattern.pattern))
        return value


class Importer:
    def __init__(self, columns, delimiter=None, strict=False, max_errors=100):
        self.columns = list(columns)
        self.delimiter = delimiter
        self.strict = strict
        self.max_errors = max_errors
        self.errors = []
        self.stats = Counter()

    def _sniff(self, sample):
        if self.delimiter:
            return self.delimiter
        try:
            return csv.Sniffer().sniff(sample, delimiters=',;\t|').delimiter
        except csv.Error:
            return ','

    def _map_header(self, header):
        mapping = {}
        for index, title in enumerate(header):
            key = title.strip().lower()
            for spec in self.columns:
                if key in spec.aliases:
                    if spec.name in mapping.values():
                        raise SchemaError('column %s appears twice' % spec.name)
                    mapping[index] = spec.name
        missing = [c.name for c in self.columns if c.required and c.name not in mapping.values()]
        if missing:
            raise SchemaError('missing required columns: %s' % ', '.join(missing))
        return mapping

    def read(self, text):
        if text.startswith('﻿'):
            text = text[1:]
        reader = csv.reader(io.StringIO(text), delimiter=self._sniff(text[:4096]))
        try:
            header = next(reader)
        except StopIteration:
            return []
        mapping = self._map_header(header)
        specs = {c.name: c for c in self.columns}
        rows = []
        for line_no, raw in enumerate(reader, start=2):
            if not any(cell.strip() for cell in raw):
                self.stats['blank'] += 1
                continue
            record = {c.name: c.default for c in self.columns}
            ok = True
            for index, cell in enumerate(raw):
                name = mapping.get(index)
                if name is None:
                    continue
                try:
                    record[name] = specs[name].coerce(cell)
                except ValueError as exc:
                    ok = False
                    self.errors.append(RowError(line_no, name, str(exc)))
                    if self.strict or len(self.errors) >= self.max_errors:
                        raise SchemaError('too many errors, last at line %d' % line_no)
            if ok:
                rows.append(record)
                self.stats['imported'] += 1
            else:
                self.stats['rejected'] += 1
        logger.info('imported %(imported)d rows, rejected %(rejected)d', dict(self.stats))
        return rows

    def to_frame(self, text):
        rows = self.read(text)
        frame = pd.DataFrame(rows, columns=[c.name for c in self.columns])
        for spec in self.columns:
            if spec.kind == 'date':
                frame[spec.name] = pd.to_datetime(frame[spec.name])
        return frame
