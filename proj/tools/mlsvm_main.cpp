#include "mlsvm/cli_app.hpp"

int main(int argc, char** argv) {
    return mlsvm::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
