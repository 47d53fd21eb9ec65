#pragma once
int run_cli(int argc, char** argv);
