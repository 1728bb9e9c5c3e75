#include "breglr/data.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace breglr;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(::testing::TempDir()) / name;
    std::ofstream(path) << body;
    return path;
}

Dataset two_class(Index per_class) {
    Dataset ds;
    ds.features.resize(2 * per_class, 2);
    ds.labels.resize(2 * per_class);
    for (Index i = 0; i < 2 * per_class; ++i) {
        ds.features(i, 0) = static_cast<double>(i);
        ds.features(i, 1) = static_cast<double>(i % 3);
        ds.labels[i] = i < per_class ? 1 : -1;
    }
    return ds;
}

}  // namespace

TEST(LoadCsv, MapsTokensAndDetectsHeader) {
    const auto path = write_file("mb.csv", "diagnosis,a,b\nM,1.0,2\nB,3,4.5\nM,-1,0\n");
    CsvOptions opt;
    opt.positive_label = "M";
    const Dataset ds = load_csv(path, opt);
    ASSERT_EQ(ds.instances(), 3);
    EXPECT_EQ(ds.dims(), 2);
    EXPECT_EQ(ds.labels, (Eigen::VectorXi{{1, -1, 1}}));
    EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_DOUBLE_EQ(ds.features(1, 1), 4.5);
}

TEST(LoadCsv, NoHeaderAndLabelColumnAtEnd) {
    const auto path = write_file("tail.csv", "0.5,1,yes\n2,3,no\n");
    CsvOptions opt;
    opt.label_column = 2;
    opt.positive_label = "yes";
    const Dataset ds = load_csv(path, opt);
    ASSERT_EQ(ds.instances(), 2);
    EXPECT_DOUBLE_EQ(ds.features(0, 0), 0.5);
    EXPECT_EQ(ds.labels[1], -1);
}

TEST(LoadCsv, RejectsBadRows) {
    const auto path = write_file("bad.csv", "y,a,b\n1,1,2\n0,abc,3\n1,4,5\n0,6,7\n0,8\n");
    const Dataset ds = load_csv(path, CsvOptions{});
    EXPECT_EQ(ds.instances(), 3);
    EXPECT_EQ(ds.rejected_rows, 2u);
    const auto one = write_file("bad1.csv", "1,1,2\n0,x,3\n1,4,5\n");
    EXPECT_EQ(load_csv(one, CsvOptions{}).rejected_rows, 1u);
}

TEST(LoadCsv, Errors) {
    EXPECT_THROW(load_csv("/nonexistent/file.csv", CsvOptions{}), DataError);
    EXPECT_THROW(load_csv(write_file("three.csv", "a,1\nb,2\nc,3\n"), CsvOptions{}), DataError);
    EXPECT_THROW(load_csv(write_file("empty.csv", ""), CsvOptions{}), DataError);
    EXPECT_THROW(load_csv(write_file("labels.csv", "1\n0\n"), CsvOptions{}), DataError);
    CsvOptions opt;
    opt.positive_label = "Q";
    EXPECT_THROW(load_csv(write_file("nopos.csv", "a,1\nb,2\n"), opt), DataError);
}

TEST(LoadCsv, GroupColumn) {
    const auto path = write_file("bags.csv", "class,molecule,f1\nmusk,m1,1\nmusk,m1,2\nnon-musk,m2,3\n");
    CsvOptions opt;
    opt.positive_label = "musk";
    opt.group_column = 1;
    const Dataset ds = load_csv(path, opt);
    EXPECT_EQ(ds.dims(), 1);
    EXPECT_EQ(ds.groups, (std::vector<std::string>{"m1", "m1", "m2"}));
}

TEST(LoadCsv, Wdbc) {
    CsvOptions opt;
    opt.positive_label = "M";
    const Dataset ds = load_csv(std::filesystem::path(BREGLR_DATA_DIR) / "wdbc.csv", opt);
    EXPECT_EQ(ds.instances(), 569);
    EXPECT_EQ(ds.dims(), 30);
    EXPECT_EQ(ds.positives(), 212);
    EXPECT_EQ(ds.rejected_rows, 0u);
}

TEST(WriteCsv, RoundTrip) {
    SynthOptions so;
    so.dim = 4;
    so.m_train = 12;
    so.m_test = 0;
    const Dataset ds = synth_hyperplane(so).train;
    const auto path = std::filesystem::path(::testing::TempDir()) / "roundtrip.csv";
    write_csv(ds, path);
    const Dataset back = load_csv(path, CsvOptions{});
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.labels, ds.labels);
}

TEST(Normalize, SingleFeatureArithmetic) {
    Dataset ds;
    ds.features = Matrix{{0.0}, {10.0}};
    ds.labels = Eigen::VectorXi{{1, -1}};
    NormalizeOptions opt;
    opt.intercept = false;
    const Normalized out = normalize(ds, opt);
    EXPECT_DOUBLE_EQ(out.dataset.features(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(out.dataset.features(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(out.matrix.entries()(0, 1), -0.5);
    EXPECT_TRUE(out.matrix.is_normalized());
}

TEST(Normalize, ColumnSumsExhaustive) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthOptions so;
        so.dim = 30;
        so.m_train = 100;
        so.seed = seed;
        const SynthData data = synth_hyperplane(so);
        for (auto mode : {ColumnNormalization::UniformDivisor, ColumnNormalization::PerExample}) {
            NormalizeOptions opt;
            opt.mode = mode;
            const FeatureScaling sc = fit_scaling(data.train, opt);
            for (const Dataset* ds : {&data.train, &data.test}) {
                const ConstraintMatrix A = constraint_matrix(*ds, sc);
                for (Index i = 0; i < A.examples(); ++i) EXPECT_LE(A.entries().col(i).lpNorm<1>(), 1.0 + 1e-15);
                EXPECT_LE(A.entries().cwiseAbs().maxCoeff(), 1.0);
            }
        }
    }
}

TEST(Normalize, ConstantFeatureMapsToZero) {
    Dataset ds;
    ds.features = Matrix{{1.0, 7.0}, {2.0, 7.0}, {3.0, 7.0}};
    ds.labels = Eigen::VectorXi{{1, -1, 1}};
    const Normalized out = normalize(ds);
    ASSERT_TRUE(out.dataset.scale_record.has_value());
    EXPECT_TRUE(out.dataset.scale_record->constant[1]);
    EXPECT_TRUE(out.matrix.entries().row(1).isZero(0.0));
    EXPECT_EQ(out.matrix.intercept_row(), Index{2});
    EXPECT_DOUBLE_EQ(out.matrix.entries()(2, 1), -1.0 / 3.0);
}

TEST(Normalize, AlreadyScaledInputIsOnlyDivided) {
    Dataset ds;
    ds.features = Matrix{{-1.0, 0.25}, {1.0, -1.0}, {0.0, 1.0}};
    ds.labels = Eigen::VectorXi{{1, 1, -1}};
    const Normalized out = normalize(ds);
    EXPECT_TRUE(out.dataset.features.leftCols(2).isApprox(ds.features / 3.0, 1e-15));
}

TEST(Normalize, RoundTripThroughScaling) {
    SynthOptions so;
    so.dim = 8;
    so.m_train = 50;
    const Dataset ds = synth_hyperplane(so).train;
    const FeatureScaling sc = fit_scaling(ds);
    for (Index i = 0; i < ds.instances(); ++i) {
        const Vector raw = ds.features.row(i).transpose();
        EXPECT_LE((sc.invert(sc.apply(raw)) - raw).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Normalize, RejectsEmpty) {
    Dataset ds;
    ds.features.resize(3, 0);
    ds.labels = Eigen::VectorXi{{1, -1, 1}};
    EXPECT_THROW(normalize(ds), DataError);
}

TEST(Synth, DeterministicAndSeparableWithoutNoise) {
    SynthOptions so;
    so.dim = 6;
    so.m_train = 80;
    so.m_test = 40;
    so.noise_sigma = 0.0;
    so.seed = 42;
    const SynthData a = synth_hyperplane(so);
    const SynthData b = synth_hyperplane(so);
    EXPECT_EQ(a.train.features, b.train.features);
    EXPECT_EQ(a.test.labels, b.test.labels);
    EXPECT_EQ(a.test.instances(), 40);
    for (Index i = 0; i < a.train.instances(); ++i) {
        const double f = a.train.features.row(i).dot(a.hyperplane);
        EXPECT_EQ(a.train.labels[i], f >= 0.0 ? 1 : -1);
        EXPECT_LE(a.train.features.row(i).cwiseAbs().maxCoeff(), 1.0);
    }
    so.seed = 43;
    EXPECT_NE(synth_hyperplane(so).train.features, a.train.features);
}

TEST(Synth, InformativeDimensions) {
    SynthOptions so;
    so.dim = 50;
    so.informative = 5;
    EXPECT_EQ((synth_hyperplane(so).hyperplane.array() != 0.0).count(), 5);
    so.noise_sigma = 1.5;
    EXPECT_THROW(synth_hyperplane(so), std::invalid_argument);
}

TEST(Split, StratifiedArithmetic) {
    const Split s = split(two_class(5), 0.2, 3);
    EXPECT_EQ(s.train.instances(), 8);
    EXPECT_EQ(s.test.instances(), 2);
    EXPECT_EQ(s.test.positives(), 1);
}

TEST(Split, DeterministicAndDisjoint) {
    const Dataset ds = two_class(20);
    const Split a = split(ds, 0.3, 9);
    const Split b = split(ds, 0.3, 9);
    EXPECT_EQ(a.test.features, b.test.features);
    std::set<double> ids;
    for (Index i = 0; i < a.train.instances(); ++i) ids.insert(a.train.features(i, 0));
    for (Index i = 0; i < a.test.instances(); ++i) EXPECT_FALSE(ids.count(a.test.features(i, 0)));
    EXPECT_EQ(ids.size() + static_cast<std::size_t>(a.test.instances()), 40u);
}

TEST(Split, WdbcHalves) {
    CsvOptions opt;
    opt.positive_label = "M";
    const Dataset ds = load_csv(std::filesystem::path(BREGLR_DATA_DIR) / "wdbc.csv", opt);
    const Split s = split(ds, 0.5, 1);
    EXPECT_EQ(s.train.instances() + s.test.instances(), 569);
    EXPECT_LE(std::abs(s.train.instances() - s.test.instances()), 1);
    EXPECT_LE(std::abs(s.train.positives() - s.test.positives()), 1);
}

TEST(Split, Errors) {
    EXPECT_THROW(split(two_class(5), 0.0, 1), std::invalid_argument);
    EXPECT_THROW(split(two_class(5), 1.0, 1), std::invalid_argument);
    Dataset lonely = two_class(3);
    lonely.labels.setConstant(-1);
    lonely.labels[0] = 1;
    EXPECT_THROW(split(lonely, 0.5, 1), DataError);
}
