#include <cstdio>

int main() {
    std::puts("hierva CLI placeholder");
    return 0;
}
