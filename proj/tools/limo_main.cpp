#include <cstdio>
int main() { std::puts("limo cli: not yet wired"); return 1; }
