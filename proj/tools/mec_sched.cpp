#include <iostream>

#include "mec/cli.hpp"

int main(int argc, char** argv) {
    return mec::dispatch(argc, argv, std::cout, std::cerr);
}
