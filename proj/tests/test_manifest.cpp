#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lesionfuse/errors.hpp"
#include "lesionfuse/manifest.hpp"

using namespace lesionfuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("lesionfuse_manifest_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write(const fs::path& dir, const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << content;
    return p;
}

}  // namespace

TEST_CASE("class names come from distinct labels in sorted order") {
    TempDir tmp;
    const auto p = write(tmp.path, "m.csv",
                         "id,path,label,split\n"
                         "a,imgs/a.png,nv,train\n"
                         "b,imgs/b.png,mel,train\n"
                         "c,imgs/c.png,nv,test\n");
    const auto m = load_manifest(p);
    REQUIRE(m.class_names == std::vector<std::string>{"mel", "nv"});
    CHECK(m.rows.size() == 3);
    CHECK(m.rows[0].label == 1);  // nv
    CHECK(m.rows[1].label == 0);  // mel
    CHECK(m.rows[0].path == tmp.path / "imgs/a.png");
}

TEST_CASE("a classes= comment pins the class set and order") {
    TempDir tmp;
    const auto p = write(tmp.path, "m.csv",
                         "# classes=nv,mel,bkl\n"
                         "id,path,label,split\n"
                         "a,a.png,mel,train\n"
                         "b,b.png,nv,val\n");
    const auto m = load_manifest(p);
    REQUIRE(m.class_names == std::vector<std::string>{"nv", "mel", "bkl"});
    CHECK(m.rows[0].label == 1);
}

TEST_CASE("empty manifest reports 'no rows'") {
    TempDir tmp;
    CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(write(tmp.path, "m.csv", ""))),
                         doctest::Contains("no rows"), DataError);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(load_manifest(write(tmp.path, "m2.csv", "id,path,label,split\n"))),
        doctest::Contains("no rows"), DataError);
}

TEST_CASE("duplicate id error names the id and both row numbers") {
    TempDir tmp;
    const auto p = write(tmp.path, "m.csv",
                         "id,path,label,split\n"
                         "img1,a.png,nv,train\n"
                         "x,b.png,mel,train\n"
                         "img1,c.png,nv,test\n");
    try {
        static_cast<void>(load_manifest(p));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("img1") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);  // first occurrence row
        CHECK(msg.find("4") != std::string::npos);  // second occurrence row
    }
}

TEST_CASE("unknown split tag is rejected with its row number") {
    TempDir tmp;
    const auto p = write(tmp.path, "m.csv",
                         "id,path,label,split\n"
                         "a,a.png,nv,train\n"
                         "b,b.png,nv,holdout\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(p)), doctest::Contains("row 3"),
                         DataError);
}

TEST_CASE("label outside a pinned class set is rejected") {
    TempDir tmp;
    const auto p = write(tmp.path, "m.csv",
                         "# classes=mel,nv\n"
                         "id,path,label,split\n"
                         "a,a.png,mel,train\n"
                         "b,b.png,bkl,train\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(p)),
                         doctest::Contains("not in class set"), DataError);
}

TEST_CASE("missing file, missing train rows and single class are rejected") {
    TempDir tmp;
    CHECK_THROWS_AS(static_cast<void>(load_manifest(tmp.path / "missing.csv")), DataError);
    const auto no_train = write(tmp.path, "m.csv",
                                "id,path,label,split\n"
                                "a,a.png,nv,test\n"
                                "b,b.png,mel,test\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(no_train)),
                         doctest::Contains("no train rows"), DataError);
    const auto one_class = write(tmp.path, "m2.csv",
                                 "id,path,label,split\n"
                                 "a,a.png,nv,train\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_manifest(one_class)),
                         doctest::Contains("at least 2 classes"), DataError);
}

TEST_CASE("split_rows filters by split") {
    TempDir tmp;
    const auto p = write(tmp.path, "m.csv",
                         "id,path,label,split\n"
                         "a,a.png,nv,train\n"
                         "b,b.png,mel,train\n"
                         "c,c.png,nv,val\n"
                         "d,d.png,mel,test\n");
    const auto m = load_manifest(p);
    CHECK(m.split_rows(Split::train).size() == 2);
    CHECK(m.split_rows(Split::val).size() == 1);
    CHECK(m.split_rows(Split::test).size() == 1);
}
