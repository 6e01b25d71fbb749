#include "mvf/expr.hpp"

int main() { return 0; }
