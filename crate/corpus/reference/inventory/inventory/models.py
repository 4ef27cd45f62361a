"""Inventory domain objects."""
import uuid
from dataclasses import dataclass, field
from decimal import Decimal


class OutOfStock(Exception):
    def __init__(self, sku, requested, available):
        super().__init__('%s: requested %d, only %d available' % (sku, requested, available))
        self.sku = sku
        self.requested = requested
        self.available = available


@dataclass
class Product:
    sku: str
    name: str
    price: Decimal
    weight_kg: float = 0.0
    tags: set = field(default_factory=set)

    def __post_init__(self):
        if self.price < 0:
            raise ValueError('price must be non-negative')
        self.sku = self.sku.upper()


@dataclass
class StockLevel:
    product: Product
    on_hand: int = 0
    reserved: int = 0

    @property
    def available(self):
        return self.on_hand - self.reserved

    def reserve(self, quantity):
        if quantity > self.available:
            raise OutOfStock(self.product.sku, quantity, self.available)
        self.reserved += quantity

    def release(self, quantity):
        self.reserved = max(self.reserved - quantity, 0)

    def ship(self, quantity):
        if quantity > self.reserved:
            raise ValueError('cannot ship more than reserved')
        self.reserved -= quantity
        self.on_hand -= quantity


@dataclass
class OrderLine:
    product: Product
    quantity: int
    discount: Decimal = Decimal('0')

    def total(self):
        gross = self.product.price * self.quantity
        return (gross * (Decimal('1') - self.discount)).quantize(Decimal('0.01'))


@dataclass
class Order:
    customer: str
    lines: list = field(default_factory=list)
    id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    status: str = 'open'

    def add(self, product, quantity, discount=Decimal('0')):
        for line in self.lines:
            if line.product.sku == product.sku and line.discount == discount:
                line.quantity += quantity
                return line
        line = OrderLine(product, quantity, discount)
        self.lines.append(line)
        return line

    def total(self):
        return sum((line.total() for line in self.lines), Decimal('0'))

    def weight(self):
        return sum(line.product.weight_kg * line.quantity for line in self.lines)
