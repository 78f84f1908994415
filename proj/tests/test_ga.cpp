#include <doctest.h>

TEST_SUITE("ga") {}
