"""lpir unit tests."""

##############################################################################
# Python imports.
import math

##############################################################################
# Values that turn up in a lot of the tests.
LN2 = math.log(2)
SMALL_GRID = ((2, 2), (2, 3), (3, 2), (3, 3), (2, 4))

### __init__.py ends here
