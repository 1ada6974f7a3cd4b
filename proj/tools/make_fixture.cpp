// Writes the synthetic face image and its landmark JSON.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "facewarp/facewarp.hpp"
#include "facewarp/fixture.hpp"

int main(int argc, char** argv) {
  using namespace facewarp;
  int width = 512;
  int height = 512;
  double tilt_degrees = 0.0;
  std::string image_path = "face.png";
  std::string landmark_path = "face.json";

  CLI::App app{"Generate a synthetic face fixture"};
  app.add_option("--width", width)->capture_default_str();
  app.add_option("--height", height)->capture_default_str();
  app.add_option("--tilt", tilt_degrees, "face roll in degrees")->capture_default_str();
  app.add_option("--image", image_path)->capture_default_str();
  app.add_option("--landmarks", landmark_path)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const LandmarkSet lm = synthetic_face(width, height, Angle::from_degrees(tilt_degrees));
    save_png(render_synthetic_face(lm, width, height), image_path);
    std::ofstream out(landmark_path);
    if (!(out << serialize_landmarks(lm) << '\n')) {
      throw IoError("cannot write '" + landmark_path + "'");
    }
  } catch (const std::exception& e) {
    std::cerr << "make_fixture: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
