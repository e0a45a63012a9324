#include <kerrcomb/cli.hpp>

int main(int argc, char** argv) { return kerrcomb::run(argc, argv); }
