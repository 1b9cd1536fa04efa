#include <doctest.h>

#include <filesystem>
#include <string>

#include "handgeo/bmp.hpp"
#include "handgeo/error.hpp"
#include "helpers.hpp"

using namespace handgeo;

TEST_CASE("bmp: bytes map to byte/255") {
  const GrayImage a = decode_bmp(test::bmp_bytes(2, 1, {0, 255}));
  REQUIRE(a.width() == 2);
  CHECK(a.at(0, 0) == 0.0);
  CHECK(a.at(1, 0) == 1.0);
  const GrayImage b = decode_bmp(test::bmp_bytes(1, 1, {128}));
  CHECK(b.at(0, 0) == 128.0 / 255.0);
  CHECK(b.at(0, 0) == doctest::Approx(0.50196).epsilon(1e-5));
}

TEST_CASE("bmp: rows are stored bottom-up") {
  const GrayImage img = decode_bmp(test::bmp_bytes(3, 2, {1, 2, 3, 4, 5, 6}));
  CHECK(img.at(0, 0) == 1 / 255.0);
  CHECK(img.at(2, 1) == 6 / 255.0);
}

TEST_CASE("bmp: resolution field and default") {
  CHECK(decode_bmp(test::bmp_bytes(1, 1, {0}, 8, 0, 3937)).dpi() == 100.0);
  CHECK(decode_bmp(test::bmp_bytes(1, 1, {0}, 8, 0, 11811)).dpi() == 300.0);
  CHECK(decode_bmp(test::bmp_bytes(1, 1, {0}, 8, 0, 0)).dpi() == 100.0);
}

TEST_CASE("bmp: unsupported depth and compression name the field") {
  auto message = [](const std::vector<std::uint8_t>& bytes) {
    try {
      decode_bmp(bytes);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kFormat);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  std::vector<std::uint8_t> rgb = test::bmp_bytes(1, 1, {}, 24);
  rgb.resize(rgb.size() + 4);
  CHECK(message(rgb) == "unsupported bit depth 24");
  CHECK(message(test::bmp_bytes(1, 1, {0}, 8, 1)) == "unsupported compression 1");
  CHECK(message({'B', 'X'}) == "truncated BMP header");
}

TEST_CASE("bmp: oversized images are rejected") {
  auto bytes = test::bmp_bytes(1, 1, {0});
  bytes[18] = 0x71;  // width 6001
  bytes[19] = 0x17;
  try {
    decode_bmp(bytes);
    FAIL("expected a size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSize);
  }
}

TEST_CASE("bmp: save/load round trip is exact for k/255 values") {
  GrayImage img(13, 7, 100);
  for (std::size_t i = 0; i < img.pixels().size(); ++i) img.pixels()[i] = (i * 29 % 256) / 255.0;
  const auto path = std::filesystem::temp_directory_path() / "handgeo_bmp_roundtrip.bmp";
  save_bmp(img, path);
  const GrayImage back = load_bmp(path);
  std::filesystem::remove(path);
  CHECK(back == img);
  CHECK_THROWS_AS(load_bmp(path), Error);
}
