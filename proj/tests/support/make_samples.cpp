// Writes the sample inputs used by the CLI tests and the README walkthrough.
#include "fixtures.hpp"

#include "genshift/io.hpp"
#include "genshift/pipeline.hpp"
#include "genshift/random.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

using namespace genshift;

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: genshift_make_samples OUTPUT_DIR\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    try {
        std::filesystem::create_directories(dir);

        io::write_mesh(dir / "cube8.obj", fixtures::cube(8));
        io::write_mesh(dir / "cube32.obj", fixtures::cube(32));
        io::write_mesh(dir / "cube32_noisy.obj", add_vertex_noise(fixtures::cube(32), 0.2, 1));

        const TriangleMesh sphere = fixtures::icosphere(2);
        io::write_mesh(dir / "icosphere2.obj", sphere);
        io::write_signal_csv(dir / "bimodal.csv", fixtures::bimodal_signal(sphere, 0.05, 17));

        const TriangleMesh roof = fixtures::wedge(8, 10);
        io::write_mesh(dir / "roof.obj", roof);
        Signal step(DomainKind::vertex, roof.vertex_count(), 1);
        for (std::size_t v = 0; v < roof.vertex_count(); ++v) step.at(v, 0) = roof.positions()[v].x() > 1e-9 ? 1.0 : 0.0;
        io::write_signal_csv(dir / "roof_step.csv", step);

        const GridDomain grid(64, 64);
        io::write_image(dir / "image64.pgm", {grid, fixtures::synthetic_image(grid, 1)});
        Signal color(DomainKind::pixel, grid.size(), 3);
        const Signal r = fixtures::synthetic_image(grid, 2), g = fixtures::synthetic_image(grid, 3);
        for (std::size_t e = 0; e < grid.size(); ++e) {
            color.at(e, 0) = r.at(e, 0);
            color.at(e, 1) = g.at(e, 0);
            color.at(e, 2) = 1.0 - r.at(e, 0);
        }
        io::write_image(dir / "color64.ppm", {grid, color});

        const double degree = std::numbers::pi / 180.0;
        io::write_xyzn(dir / "two_sheets.xyzn", fixtures::two_sheet_cloud(12, 5.0, 20.0 * degree, 2));
        io::write_xyzn(dir / "sphere_cloud.xyzn", fixtures::noisy_sphere_cloud(1000, 20.0 * degree, 3));
    } catch (const std::exception& e) {
        std::cerr << "genshift_make_samples: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
