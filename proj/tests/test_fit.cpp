#include <doctest.h>

TEST_SUITE("fit") {}
