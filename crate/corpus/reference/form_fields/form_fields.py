"""Declarative form fields with cleaning and validation."""
import datetime
import decimal
import re
from email.utils import parseaddr

from dateutil import parser as date_parser

EMPTY_VALUES = (None, '', [], (), {})


class ValidationError(Exception):
    def __init__(self, message, code=None, params=None):
        super().__init__(message)
        self.message = message
        self.code = code
        self.params = params or {}

    def __str__(self):
        return self.message % self.params if self.params else self.message


class Field:
    default_error_messages = {'required': 'This field is required.'}
    creation_counter = 0

    def __init__(self, required=True, initial=None, validators=(), label=None, help_text=''):
        self.required = required
        self.initial = initial
        self.validators = list(validators)
        self.label = label
        self.help_text = help_text
        self.error_messages = dict(self.default_error_messages)
        self.creation_counter = Field.creation_counter
        Field.creation_counter += 1

    def to_python(self, value):
        return value

    def validate(self, value):
        if value in EMPTY_VALUES and self.required:
            raise ValidationError(self.error_messages['required'], code='required')

    def run_validators(self, value):
        if value in EMPTY_VALUES:
            return
        errors = []
        for v in self.validators:
            try:
                v(value)
            except ValidationError as e:
                errors.append(e)
        if errors:
            raise errors[0]

    def clean(self, value):
        value = self.to_python(value)
        self.validate(value)
        self.run_validators(value)
        return value


class CharField(Field):
    def __init__(self, max_length=None, min_length=None, strip=True, **kwargs):
        self.max_length = max_length
        self.min_length = min_length
        self.strip = strip
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in EMPTY_VALUES:
            return ''
        value = str(value)
        if self.strip:
            value = value.strip()
        return value

    def validate(self, value):
        super().validate(value)
        if self.max_length is not None and len(value) > self.max_length:
            raise ValidationError('Ensure this value has at most %(limit)d characters.', 'max_length', {'limit': self.max_length})
        if self.min_length is not None and value and len(value) < self.min_length:
            raise ValidationError('Ensure this value has at least %(limit)d characters.', 'min_length', {'limit': self.min_length})


class IntegerField(Field):
    re_decimal = re.compile(r'\.0*\s*$')

    def __init__(self, min_value=None, max_value=None, **kwargs):
        self.min_value = min_value
        self.max_value = max_value
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in EMPTY_VALUES:
            return None
        try:
            return int(self.re_decimal.sub('', str(value)))
        except (ValueError, TypeError):
            raise ValidationError('Enter a whole number.', code='invalid')

    def validate(self, value):
        super().validate(value)
        if value is None:
            return
        if self.min_value is not None and value < self.min_value:
            raise ValidationError('Ensure this value is greater than or equal to %(limit)s.', 'min_value', {'limit': self.min_value})
        if self.max_value is not None and value > self.max_value:
            raise ValidationError('Ensure this value is less than or equal to %(limit)s.', 'max_value', {'limit': self.max_value})


class DecimalField(IntegerField):
    def __init__(self, max_digits=None, decimal_places=None, **kwargs):
        self.max_digits = max_digits
        self.decimal_places = decimal_places
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in EMPTY_VALUES:
            return None
        try:
            value = decimal.Decimal(str(value).strip())
        except decimal.InvalidOperation:
            raise ValidationError('Enter a number.', code='invalid')
        if not value.is_finite():
            raise ValidationError('Enter a number.', code='invalid')
        return value

    def validate(self, value):
        super().validate(value)
        if value is None:
            return
        sign, digits, exponent = value.as_tuple()
        decimals = -exponent if exponent < 0 else 0
        whole = len(digits) - decimals
        if self.max_digits is not None and len(digits) > self.max_digits:
            raise ValidationError('Ensure that there are no more than %(max)s digits in total.', 'max_digits', {'max': self.max_digits})
        if self.decimal_places is not None and decimals > self.decimal_places:
            raise ValidationError('Ensure that there are no more than %(max)s decimal places.', 'max_decimal_places', {'max': self.decimal_places})
        if self.max_digits is not None and self.decimal_places is not None and whole > self.max_digits - self.decimal_places:
            raise ValidationError('Too many digits before the decimal point.', 'max_whole_digits')


class DateField(Field):
    input_formats = ('%Y-%m-%d', '%m/%d/%Y', '%d.%m.%Y')

    def to_python(self, value):
        if value in EMPTY_VALUES:
            return None
        if isinstance(value, datetime.datetime):
            return value.date()
        if isinstance(value, datetime.date):
            return value
        for fmt in self.input_formats:
            try:
                return datetime.datetime.strptime(value.strip(), fmt).date()
            except (ValueError, TypeError):
                continue
        try:
            return date_parser.parse(value).date()
        except (ValueError, OverflowError):
            raise ValidationError('Enter a valid date.', code='invalid')


class EmailField(CharField):
    pattern = re.compile(r'^[^@\s]+@[^@\s]+\.[A-Za-z]{2,}$')

    def validate(self, value):
        super().validate(value)
        if value and not self.pattern.match(parseaddr(value)[1] or ''):
            raise ValidationError('Enter a valid email address.', code='invalid')


class Form:
    def __init__(self, data=None, prefix=None):
        self.data = data or {}
        self.prefix = prefix
        self.cleaned_data = {}
        self.errors = {}
        self.fields = sorted(
            ((name, f) for name, f in type(self).__dict__.items() if isinstance(f, Field)),
            key=lambda item: item[1].creation_counter,
        )

    def add_prefix(self, name):
        return '%s-%s' % (self.prefix, name) if self.prefix else name

    def full_clean(self):
        self.cleaned_data = {}
        self.errors = {}
        for name, field in self.fields:
            raw = self.data.get(self.add_prefix(name), field.initial)
            try:
                self.cleaned_data[name] = field.clean(raw)
            except ValidationError as e:
                self.errors.setdefault(name, []).append(str(e))
            hook = getattr(self, 'clean_%s' % name, None)
            if hook is not None and name in self.cleaned_data:
                try:
                    self.cleaned_data[name] = hook()
                except ValidationError as e:
                    self.errors.setdefault(name, []).append(str(e))
                    del self.cleaned_data[name]

    def is_valid(self):
        self.full_clean()
        return not self.errors
