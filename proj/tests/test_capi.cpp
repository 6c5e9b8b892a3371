#include <doctest.h>
#include "buriedfem/buriedfem.h"
