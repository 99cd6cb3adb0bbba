#include "normetric_cli.hpp"

int main(int argc, char** argv) {
    return normetric::cli::cli_main(argc, argv);
}
