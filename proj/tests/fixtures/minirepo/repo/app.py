import sys

from calc.ops import add
from calc.fmt import show


def main(argv):
    total = 0
    for arg in argv:
        total = add(total, int(arg))
    print(show(total))


if __name__ == "__main__":
    main(sys.argv[1:])
