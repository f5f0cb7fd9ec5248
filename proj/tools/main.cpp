#include <cstdio>

int main() {
    std::puts("slidemil: subcommands not wired yet");
    return 0;
}
