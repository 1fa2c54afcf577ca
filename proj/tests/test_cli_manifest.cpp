#include "manifest.hpp"

#include "permuton/errors.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace permuton::cli;

TEST_CASE("sha256 of a file") {
    const std::string path = "manifest_test_abc.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "abc";
    }
    CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    RunManifest m;
    m.subcommand = "sample-baxter";
    m.seed = 3;
    m.outputs = {path};
    const auto j = m.to_json();
    CHECK(j["outputs"][0]["sha256"] == sha256_file(path));
    CHECK(j["seed"] == 3);
    std::remove(path.c_str());
    CHECK_THROWS_AS(sha256_file(path), permuton::InputError);
}
