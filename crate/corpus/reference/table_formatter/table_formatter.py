"""Column alignment and rendering for tabular console output."""
import math
import re
import shutil
from collections import OrderedDict
from decimal import Decimal

import numpy as np

ANSI = re.compile(r'\x1b\[[0-9;]*m')


def visible_width(text):
    return len(ANSI.sub('', str(text)))


class Column:
    def __init__(self, name, align='left', fmt=None, max_width=None):
        if align not in ('left', 'right', 'center', 'decimal'):
            raise ValueError('unknown alignment: %r' % align)
        self.name = name
        self.align = align
        self.fmt = fmt
        self.max_width = max_width

    def render(self, value):
        if value is None:
            return ''
        if self.fmt is not None:
            return format(value, self.fmt)
        if isinstance(value, float):
            if math.isnan(value):
                return 'nan'
            if value != 0 and (abs(value) >= 1e6 or abs(value) < 1e-4):
                return '%.3e' % value
            return ('%.6f' % value).rstrip('0').rstrip('.')
        if isinstance(value, Decimal):
            return str(value.normalize())
        return str(value)


class Table:
    def __init__(self, columns, rows=None, padding=1):
        self.columns = [c if isinstance(c, Column) else Column(c) for c in columns]
        self.rows = []
        self.padding = padding
        for row in rows or []:
            self.add_row(row)

    def add_row(self, row):
        if isinstance(row, dict):
            row = [row.get(c.name) for c in self.columns]
        if len(row) != len(self.columns):
            raise ValueError('row has %d cells, expected %d' % (len(row), len(self.columns)))
        self.rows.append(list(row))

    def _cells(self):
        out = []
        for row in self.rows:
            out.append([col.render(v) for col, v in zip(self.columns, row)])
        return out

    def widths(self, cells):
        widths = [visible_width(c.name) for c in self.columns]
        for row in cells:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], visible_width(cell))
        for i, col in enumerate(self.columns):
            if col.max_width is not None and widths[i] > col.max_width:
                widths[i] = col.max_width
        return widths

    def _decimal_offsets(self, cells, index):
        offsets = []
        for row in cells:
            text = row[index]
            dot = text.find('.')
            offsets.append(len(text) - dot if dot >= 0 else 0)
        return max(offsets) if offsets else 0

    def _pad(self, text, width, col, decimals=0):
        if visible_width(text) > width:
            text = text[:max(width - 1, 0)] + '…'
        gap = width - visible_width(text)
        if col.align == 'right':
            return ' ' * gap + text
        if col.align == 'center':
            left = gap // 2
            return ' ' * left + text + ' ' * (gap - left)
        if col.align == 'decimal':
            dot = text.find('.')
            tail = len(text) - dot if dot >= 0 else 0
            shift = decimals - tail
            text = text + ' ' * max(shift, 0)
            gap = width - visible_width(text)
            return ' ' * max(gap, 0) + text
        return text + ' ' * gap

    def render(self, max_total=None):
        cells = self._cells()
        widths = self.widths(cells)
        if max_total is None:
            max_total = shutil.get_terminal_size((120, 20)).columns
        total = sum(widths) + self.padding * 2 * len(widths)
        while total > max_total and max(widths) > 4:
            widest = int(np.argmax(widths))
            widths[widest] -= 1
            total -= 1
        pad = ' ' * self.padding
        lines = []
        header = [self._pad(c.name, w, c) for c, w in zip(self.columns, widths)]
        lines.append(pad + (pad + '|' + pad).join(header) + pad)
        lines.append('+'.join('-' * (w + 2 * self.padding) for w in widths))
        decimals = OrderedDict()
        for i, col in enumerate(self.columns):
            if col.align == 'decimal':
                decimals[i] = self._decimal_offsets(cells, i)
        for row in cells:
            parts = []
            for i, (cell, col, w) in enumerate(zip(row, self.columns, widths)):
                parts.append(self._pad(cell, w, col, decimals.get(i, 0)))
            lines.append(pad + (pad + '|' + pad).join(parts) + pad)
        return '\n'.join(lines)

    def column_stats(self, name):
        index = [c.name for c in self.columns].index(name)
        values = np.array([r[index] for r in self.rows if isinstance(r[index], (int, float))], dtype=float)
        if values.size == 0:
            return {}
        return {'min': float(values.min()), 'max': float(values.max()),
                'mean': float(values.mean()), 'std': float(values.std())}
