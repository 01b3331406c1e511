// Writes a procedural dataset in the loader's directory layout.
#include <iostream>

#include <CLI11.hpp>

#include "opencat/error.hpp"
#include "opencat/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic object dataset"};
  std::string root;
  std::size_t categories = 6, instances = 2, views = 10, points = 1500;
  app.add_option("root", root, "Output directory")->required();
  app.add_option("--categories", categories, "Number of categories (1-6)");
  app.add_option("--instances", instances, "Instances per category");
  app.add_option("--views", views, "Views per instance");
  app.add_option("--points", points, "Points per view");
  CLI11_PARSE(app, argc, argv);

  try {
    opencat::SyntheticOptions opts;
    opts.points = points;
    const auto index = opencat::write_synthetic_dataset(root, categories, instances, views, opts);
    std::cout << index.views.size() << " views in " << index.categories().size() << " categories under " << root
              << "\n";
  } catch (const opencat::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
