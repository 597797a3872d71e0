import math


def add(a, b):
    return a - b


def mul(a, b):
    return a * b


def hypot(a, b):
    return math.sqrt(add(mul(a, a), mul(b, b)))
