"""Order fulfilment on top of the inventory models."""
import logging
import threading
from collections import defaultdict
from decimal import Decimal

from inventory.models import Order, OutOfStock, Product, StockLevel

log = logging.getLogger(__name__)

SHIPPING_BANDS = [(1.0, Decimal('4.99')), (5.0, Decimal('9.99')), (20.0, Decimal('19.99'))]


class Warehouse:
    def __init__(self, name):
        self.name = name
        self.levels = {}
        self._lock = threading.Lock()
        self.history = defaultdict(list)

    def stock(self, product, quantity):
        with self._lock:
            level = self.levels.get(product.sku)
            if level is None:
                level = self.levels[product.sku] = StockLevel(product)
            level.on_hand += quantity
            self.history[product.sku].append(('stock', quantity))

    def level(self, sku):
        level = self.levels.get(sku.upper())
        if level is None:
            raise KeyError('unknown sku %s' % sku)
        return level

    def reserve_order(self, order):
        reserved = []
        with self._lock:
            try:
                for line in order.lines:
                    level = self.level(line.product.sku)
                    level.reserve(line.quantity)
                    reserved.append((level, line.quantity))
            except (OutOfStock, KeyError):
                for level, quantity in reserved:
                    level.release(quantity)
                raise
        order.status = 'reserved'
        for level, quantity in reserved:
            self.history[level.product.sku].append(('reserve', quantity))

    def ship_order(self, order):
        if order.status != 'reserved':
            raise ValueError('order %s is %s, not reserved' % (order.id, order.status))
        with self._lock:
            for line in order.lines:
                self.level(line.product.sku).ship(line.quantity)
                self.history[line.product.sku].append(('ship', line.quantity))
        order.status = 'shipped'


def shipping_cost(order):
    weight = order.weight()
    for limit, cost in SHIPPING_BANDS:
        if weight <= limit:
            return cost
    extra = Decimal(str(round(weight - SHIPPING_BANDS[-1][0], 1)))
    return SHIPPING_BANDS[-1][1] + extra * Decimal('0.50')


def quote(order, coupon=None):
    subtotal = order.total()
    discount = Decimal('0')
    if coupon is not None:
        kind, amount = coupon
        if kind == 'percent':
            discount = (subtotal * Decimal(amount) / 100).quantize(Decimal('0.01'))
        elif kind == 'fixed':
            discount = min(Decimal(amount), subtotal)
        else:
            log.warning('ignoring unknown coupon kind %s', kind)
    return {'subtotal': subtotal, 'discount': discount,
            'shipping': shipping_cost(order), 'total': subtotal - discount + shipping_cost(order)}


def fulfil(warehouses, order):
    """Reserve the order in the first warehouse that can serve it completely."""
    errors = []
    for wh in warehouses:
        try:
            wh.reserve_order(order)
        except (OutOfStock, KeyError) as exc:
            errors.append('%s: %s' % (wh.name, exc))
            continue
        wh.ship_order(order)
        return wh
    raise OutOfStock(order.lines[0].product.sku if order.lines else '?', 0, 0) from None


def restock_plan(warehouse, targets):
    plan = {}
    for sku, target in targets.items():
        try:
            level = warehouse.level(sku)
        except KeyError:
            plan[sku] = target
            continue
        short = target - level.available
        if short > 0:
            plan[sku] = short
    return plan


def catalogue(products):
    by_tag = defaultdict(list)
    for p in products:
        if not isinstance(p, Product):
            raise TypeError('expected Product, got %r' % (p,))
        for tag in sorted(p.tags) or ['untagged']:
            by_tag[tag].append(p.sku)
    return {tag: sorted(skus) for tag, skus in by_tag.items()}
