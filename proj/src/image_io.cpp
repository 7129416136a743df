#include "siqa/image_io.hpp"

#include <opencv2/imgcodecs.hpp>

namespace siqa {

RgbImage read_rgb_image(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot decode image " + path.string());

    RgbImage img;
    img.height = bgr.rows;
    img.width = bgr.cols;
    const std::size_t n = static_cast<std::size_t>(bgr.rows) * bgr.cols;
    img.r.resize(n);
    img.g.resize(n);
    img.b.resize(n);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * bgr.cols + x;
            img.b[i] = row[x][0];
            img.g[i] = row[x][1];
            img.r[i] = row[x][2];
        }
    }
    return img;
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y) {
        unsigned char* row = m.ptr<unsigned char>(y);
        for (int x = 0; x < img.width; ++x) {
            double v = std::round(img.at(y, x));
            if (v < 0.0) v = 0.0;
            if (v > 255.0) v = 255.0;
            row[x] = static_cast<unsigned char>(v);
        }
    }
    if (!cv::imwrite(path.string(), m))
        throw IoError("cannot write image " + path.string());
}

}  // namespace siqa
