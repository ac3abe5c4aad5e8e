#include <cstdio>
int main() { std::puts("catkit: placeholder"); return 0; }
