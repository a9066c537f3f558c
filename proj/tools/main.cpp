#include "evfield/cli.hpp"

int main(int argc, char** argv)
{
    return evfield::cli::run_command(argc, argv);
}
