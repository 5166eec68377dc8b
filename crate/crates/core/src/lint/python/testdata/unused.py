def f1():
    acc = 0
    acc += 1


def f2(xs):
    for x in xs:
        print("hi")


class C:
    def m(self, a, b):
        return a

    @staticmethod
    def s(a):
        return 1


def f3():
    def inner():
        return 1
    return 2


TOP = 1


def f4(a):
    val = a
    def g():
        return val
    return g


def f5(a):
    x = y = a
    _tmp = 1
    z, w = a, a
    return y + z


def f6(a):
    try:
        return int(a)
    except ValueError as err:
        return 0


def f7(a):
    with open(a) as fh:
        return 1


def f8(a):
    import os
    b = [q for q in a]
    return 1


def h1():
    x = 1
    x = 2


def h2(a):
    def g():
        return a
    return g


def h3(a):
    b = a
    def g():
        b = 3
        return b
    return g


def h4(cnt):
    global TOTAL
    TOTAL = cnt


def h5(a, *args, **kwargs):
    return a


def h6(a):
    del a


def h7(a):
    print(f"{a}")
    n = 1
    return lambda: n
