#include <gtest/gtest.h>

#include "snowgrid/errors.hpp"
#include "snowgrid/geodata.hpp"
#include "support.hpp"

using namespace snowgrid;

namespace {

const char* kCasesHeader = "id,easting,northing,count,angle_deg\n";
const char* kPumpsHeader = "id,label,easting,northing\n";
const char* kStreetsHeader = "start_easting,start_northing,end_easting,end_northing\n";

void write_dataset(const std::filesystem::path& dir, const std::string& cases, const std::string& pumps,
                   const std::string& streets) {
    write_text_file(dir / "cases.csv", cases);
    write_text_file(dir / "pumps.csv", pumps);
    write_text_file(dir / "streets.csv", streets);
}

}  // namespace

TEST(ParseCases, MapsFieldsByName) {
    const auto cases = parse_cases_csv(std::string(kCasesHeader) + "12,529308.7,181031.4,3,65\n");
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].id, 12);
    EXPECT_DOUBLE_EQ(cases[0].location.easting, 529308.7);
    EXPECT_DOUBLE_EQ(cases[0].location.northing, 181031.4);
    EXPECT_EQ(cases[0].count, 3);
    EXPECT_DOUBLE_EQ(cases[0].angle_deg, 65.0);
}

TEST(ParseCases, ColumnOrderDoesNotMatter) {
    const auto cases = parse_cases_csv("count,angle_deg,id,northing,easting\n3,65,12,181031.4,529308.7\n");
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].id, 12);
    EXPECT_DOUBLE_EQ(cases[0].location.easting, 529308.7);
}

TEST(ParseCases, MalformedRowReportsLine) {
    const std::string text = std::string(kCasesHeader) + "1,529300,181000,1,0\n2,529300,abc,1,0\n";
    try {
        parse_cases_csv(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(ParseCases, WrongFieldCountIsParseError) {
    EXPECT_THROW(parse_cases_csv(std::string(kCasesHeader) + "1,529300,181000,1\n"), ParseError);
}

TEST(ParseCases, MissingColumnIsParseError) {
    EXPECT_THROW(parse_cases_csv("id,easting,northing,count\n1,2,3,4\n"), ParseError);
}

TEST(ParseCases, UnknownColumnWarnsAndIsIgnored) {
    std::vector<std::string> warnings;
    const auto cases =
        parse_cases_csv("id,easting,northing,count,angle_deg,note\n1,529300,181000,2,10,x\n", &warnings);
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].count, 2);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("note"), std::string::npos);
}

TEST(ParseCases, AcceptsCrlfAndBlankLines) {
    const auto cases = parse_cases_csv("id,easting,northing,count,angle_deg\r\n1,529300,181000,2,10\r\n\r\n");
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_DOUBLE_EQ(cases[0].angle_deg, 10.0);
}

TEST(ParsePumps, EmptyLabelAllowed) {
    const auto pumps = parse_pumps_csv(std::string(kPumpsHeader) + "1,,529177.63,181353.82\n9,Broad Street,1,2\n");
    ASSERT_EQ(pumps.size(), 2u);
    EXPECT_TRUE(pumps[0].label.empty());
    EXPECT_EQ(pumps[1].label, "Broad Street");
    EXPECT_EQ(pumps[0].display_name(), "Pump 1");
    EXPECT_EQ(pumps[1].display_name(), "Broad Street");
}

TEST(LoadDataset, MissingFile) {
    test::TempDir dir("missing");
    write_text_file(dir.path() / "cases.csv", kCasesHeader);
    EXPECT_THROW(load_dataset(dir.path()), MissingInput);
    EXPECT_THROW(load_dataset(dir.path() / "nope"), MissingInput);
}

TEST(LoadDataset, DuplicatePumpIdIsValidationError) {
    test::TempDir dir("dup");
    write_dataset(dir.path(), std::string(kCasesHeader) + "1,529300,181000,1,0\n",
                  std::string(kPumpsHeader) + "4,,529400,181000\n4,,529500,181100\n", kStreetsHeader);
    try {
        load_dataset(dir.path());
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.record_id(), 4);
    }
}

TEST(LoadDataset, DefaultBboxIsStudyBox) {
    const Dataset& ds = test::vendored();
    EXPECT_DOUBLE_EQ(ds.bbox.min.easting, 529150.0);
    EXPECT_DOUBLE_EQ(ds.bbox.min.northing, 180720.6);
    EXPECT_DOUBLE_EQ(ds.bbox.max.easting, 529750.9);
    EXPECT_DOUBLE_EQ(ds.bbox.max.northing, 181370.5);
}

TEST(LoadDataset, VendoredCardinalities) {
    const Dataset& ds = test::vendored();
    EXPECT_EQ(ds.cases.size(), 133u);
    EXPECT_EQ(ds.pumps.size(), 13u);
    EXPECT_EQ(ds.streets.size(), 189u);
    EXPECT_EQ(ds.total_deaths(), 392);
}

TEST(LoadDataset, VendoredCasesWithinMargin) {
    const Dataset& ds = test::vendored();
    const BoundingBox extent = ds.bbox.expanded(50.0);
    for (const auto& c : ds.cases) EXPECT_TRUE(extent.contains(c.location)) << "case " << c.id;
    for (const auto& p : ds.pumps) EXPECT_TRUE(extent.contains(p.location)) << "pump " << p.id;
}

TEST(LoadDataset, ExactlyOneBroadStreet) {
    const Dataset& ds = test::vendored();
    int n = 0;
    for (const auto& p : ds.pumps) n += p.label == "Broad Street";
    EXPECT_EQ(n, 1);
    ASSERT_NE(ds.find_pump(test::kBroadStreetId), nullptr);
    EXPECT_EQ(ds.find_pump(test::kBroadStreetId)->label, "Broad Street");
}

TEST(LoadDataset, Deterministic) {
    EXPECT_EQ(load_dataset(test::data_dir()), load_dataset(test::data_dir()));
}

TEST(LoadDataset, SaveRoundTripsBitExactly) {
    test::TempDir dir("roundtrip");
    save_dataset(test::vendored(), dir.path());
    for (const char* name : {"cases.csv", "pumps.csv", "streets.csv"}) {
        EXPECT_EQ(read_text_file(dir.path() / name), read_text_file(test::data_dir() / name)) << name;
    }
    EXPECT_EQ(load_dataset(dir.path()), test::vendored());
}

TEST(Validate, VendoredDatasetIsClean) {
    const auto report = validate(test::vendored());
    EXPECT_TRUE(report.ok());
    for (const auto& f : report.findings) ADD_FAILURE() << f.message;
}

TEST(Validate, NonpositiveCount) {
    Dataset ds = test::vendored();
    ds.cases[4].count = 0;
    const auto report = validate(ds);
    ASSERT_EQ(report.findings.size(), 1u);
    EXPECT_EQ(report.findings[0].message, "nonpositive count, case 5");
    EXPECT_EQ(report.findings[0].record_id, 5);
}

TEST(Validate, DuplicatePumpLocation) {
    Dataset ds = test::vendored();
    ds.pumps[2].location = ds.pumps[0].location;
    const auto report = validate(ds);
    ASSERT_EQ(report.findings.size(), 1u);
    EXPECT_EQ(report.findings[0].message.rfind("duplicate pump location", 0), 0u);
}

TEST(Validate, CaseOutsideExtent) {
    Dataset ds = test::vendored();
    ds.cases[0].location.easting = ds.bbox.min.easting - 51.0;
    const auto report = validate(ds);
    ASSERT_EQ(report.findings.size(), 1u);
    EXPECT_EQ(report.findings[0].record_id, ds.cases[0].id);
}

TEST(Validate, ZeroLengthStreet) {
    Dataset ds = test::vendored();
    ds.streets[0].end = ds.streets[0].start;
    EXPECT_FALSE(validate(ds).ok());
}

TEST(Validate, DoesNotMutate) {
    Dataset ds = test::vendored();
    ds.cases[0].count = -3;
    const Dataset before = ds;
    (void)validate(ds);
    EXPECT_EQ(ds, before);
}

TEST(Format, NormalizesToCentimeters) {
    const std::vector<CaseRecord> cases{{7, {529300.123456, 181000.5}, 2, 12.5}};
    EXPECT_EQ(format_cases_csv(cases), "id,easting,northing,count,angle_deg\n7,529300.12,181000.50,2,12.5\n");
}
