//! 256-entry colormap lookup tables.

pub(super) static INFERNO: [[u8; 3]; 256] = [
    [0, 0, 4],
    [1, 0, 5],
    [1, 1, 6],
    [1, 1, 8],
    [2, 1, 10],
    [2, 2, 12],
    [2, 2, 14],
    [3, 2, 16],
    [4, 3, 18],
    [4, 3, 20],
    [5, 4, 23],
    [6, 4, 25],
    [7, 5, 27],
    [8, 5, 29],
    [9, 6, 31],
    [10, 7, 34],
    [11, 7, 36],
    [12, 8, 38],
    [13, 8, 41],
    [14, 9, 43],
    [16, 9, 45],
    [17, 10, 48],
    [18, 10, 50],
    [20, 11, 52],
    [21, 11, 55],
    [22, 11, 57],
    [24, 12, 60],
    [25, 12, 62],
    [27, 12, 65],
    [28, 12, 67],
    [30, 12, 69],
    [31, 12, 72],
    [33, 12, 74],
    [35, 12, 76],
    [36, 12, 79],
    [38, 12, 81],
    [40, 11, 83],
    [41, 11, 85],
    [43, 11, 87],
    [45, 11, 89],
    [47, 10, 91],
    [49, 10, 92],
    [50, 10, 94],
    [52, 10, 95],
    [54, 9, 97],
    [56, 9, 98],
    [57, 9, 99],
    [59, 9, 100],
    [61, 9, 101],
    [62, 9, 102],
    [64, 10, 103],
    [66, 10, 104],
    [68, 10, 104],
    [69, 10, 105],
    [71, 11, 106],
    [73, 11, 106],
    [74, 12, 107],
    [76, 12, 107],
    [77, 13, 108],
    [79, 13, 108],
    [81, 14, 108],
    [82, 14, 109],
    [84, 15, 109],
    [85, 15, 109],
    [87, 16, 110],
    [89, 16, 110],
    [90, 17, 110],
    [92, 18, 110],
    [93, 18, 110],
    [95, 19, 110],
    [97, 19, 110],
    [98, 20, 110],
    [100, 21, 110],
    [101, 21, 110],
    [103, 22, 110],
    [105, 22, 110],
    [106, 23, 110],
    [108, 24, 110],
    [109, 24, 110],
    [111, 25, 110],
    [113, 25, 110],
    [114, 26, 110],
    [116, 26, 110],
    [117, 27, 110],
    [119, 28, 109],
    [120, 28, 109],
    [122, 29, 109],
    [124, 29, 109],
    [125, 30, 109],
    [127, 30, 108],
    [128, 31, 108],
    [130, 32, 108],
    [132, 32, 107],
    [133, 33, 107],
    [135, 33, 107],
    [136, 34, 106],
    [138, 34, 106],
    [140, 35, 105],
    [141, 35, 105],
    [143, 36, 105],
    [144, 37, 104],
    [146, 37, 104],
    [147, 38, 103],
    [149, 38, 103],
    [151, 39, 102],
    [152, 39, 102],
    [154, 40, 101],
    [155, 41, 100],
    [157, 41, 100],
    [159, 42, 99],
    [160, 42, 99],
    [162, 43, 98],
    [163, 44, 97],
    [165, 44, 96],
    [166, 45, 96],
    [168, 46, 95],
    [169, 46, 94],
    [171, 47, 94],
    [173, 48, 93],
    [174, 48, 92],
    [176, 49, 91],
    [177, 50, 90],
    [179, 50, 90],
    [180, 51, 89],
    [182, 52, 88],
    [183, 53, 87],
    [185, 53, 86],
    [186, 54, 85],
    [188, 55, 84],
    [189, 56, 83],
    [191, 57, 82],
    [192, 58, 81],
    [193, 58, 80],
    [195, 59, 79],
    [196, 60, 78],
    [198, 61, 77],
    [199, 62, 76],
    [200, 63, 75],
    [202, 64, 74],
    [203, 65, 73],
    [204, 66, 72],
    [206, 67, 71],
    [207, 68, 70],
    [208, 69, 69],
    [210, 70, 68],
    [211, 71, 67],
    [212, 72, 66],
    [213, 74, 65],
    [215, 75, 63],
    [216, 76, 62],
    [217, 77, 61],
    [218, 78, 60],
    [219, 80, 59],
    [221, 81, 58],
    [222, 82, 56],
    [223, 83, 55],
    [224, 85, 54],
    [225, 86, 53],
    [226, 87, 52],
    [227, 89, 51],
    [228, 90, 49],
    [229, 92, 48],
    [230, 93, 47],
    [231, 94, 46],
    [232, 96, 45],
    [233, 97, 43],
    [234, 99, 42],
    [235, 100, 41],
    [235, 102, 40],
    [236, 103, 38],
    [237, 105, 37],
    [238, 106, 36],
    [239, 108, 35],
    [239, 110, 33],
    [240, 111, 32],
    [241, 113, 31],
    [241, 115, 29],
    [242, 116, 28],
    [243, 118, 27],
    [243, 120, 25],
    [244, 121, 24],
    [245, 123, 23],
    [245, 125, 21],
    [246, 126, 20],
    [246, 128, 19],
    [247, 130, 18],
    [247, 132, 16],
    [248, 133, 15],
    [248, 135, 14],
    [248, 137, 12],
    [249, 139, 11],
    [249, 140, 10],
    [249, 142, 9],
    [250, 144, 8],
    [250, 146, 7],
    [250, 148, 7],
    [251, 150, 6],
    [251, 151, 6],
    [251, 153, 6],
    [251, 155, 6],
    [251, 157, 7],
    [252, 159, 7],
    [252, 161, 8],
    [252, 163, 9],
    [252, 165, 10],
    [252, 166, 12],
    [252, 168, 13],
    [252, 170, 15],
    [252, 172, 17],
    [252, 174, 18],
    [252, 176, 20],
    [252, 178, 22],
    [252, 180, 24],
    [251, 182, 26],
    [251, 184, 29],
    [251, 186, 31],
    [251, 188, 33],
    [251, 190, 35],
    [250, 192, 38],
    [250, 194, 40],
    [250, 196, 42],
    [250, 198, 45],
    [249, 199, 47],
    [249, 201, 50],
    [249, 203, 53],
    [248, 205, 55],
    [248, 207, 58],
    [247, 209, 61],
    [247, 211, 64],
    [246, 213, 67],
    [246, 215, 70],
    [245, 217, 73],
    [245, 219, 76],
    [244, 221, 79],
    [244, 223, 83],
    [244, 225, 86],
    [243, 227, 90],
    [243, 229, 93],
    [242, 230, 97],
    [242, 232, 101],
    [242, 234, 105],
    [241, 236, 109],
    [241, 237, 113],
    [241, 239, 117],
    [241, 241, 121],
    [242, 242, 125],
    [242, 244, 130],
    [243, 245, 134],
    [243, 246, 138],
    [244, 248, 142],
    [245, 249, 146],
    [246, 250, 150],
    [248, 251, 154],
    [249, 252, 157],
    [250, 253, 161],
    [252, 255, 164],
];

pub(super) static JET: [[u8; 3]; 256] = [
    [0, 0, 128],
    [0, 0, 132],
    [0, 0, 137],
    [0, 0, 141],
    [0, 0, 146],
    [0, 0, 150],
    [0, 0, 155],
    [0, 0, 159],
    [0, 0, 164],
    [0, 0, 168],
    [0, 0, 173],
    [0, 0, 178],
    [0, 0, 182],
    [0, 0, 187],
    [0, 0, 191],
    [0, 0, 196],
    [0, 0, 200],
    [0, 0, 205],
    [0, 0, 209],
    [0, 0, 214],
    [0, 0, 218],
    [0, 0, 223],
    [0, 0, 227],
    [0, 0, 232],
    [0, 0, 237],
    [0, 0, 241],
    [0, 0, 246],
    [0, 0, 250],
    [0, 0, 255],
    [0, 0, 255],
    [0, 0, 255],
    [0, 0, 255],
    [0, 0, 255],
    [0, 4, 255],
    [0, 8, 255],
    [0, 12, 255],
    [0, 16, 255],
    [0, 20, 255],
    [0, 24, 255],
    [0, 28, 255],
    [0, 32, 255],
    [0, 36, 255],
    [0, 40, 255],
    [0, 44, 255],
    [0, 48, 255],
    [0, 52, 255],
    [0, 56, 255],
    [0, 60, 255],
    [0, 64, 255],
    [0, 68, 255],
    [0, 72, 255],
    [0, 76, 255],
    [0, 80, 255],
    [0, 84, 255],
    [0, 88, 255],
    [0, 92, 255],
    [0, 96, 255],
    [0, 100, 255],
    [0, 104, 255],
    [0, 108, 255],
    [0, 112, 255],
    [0, 116, 255],
    [0, 120, 255],
    [0, 124, 255],
    [0, 128, 255],
    [0, 132, 255],
    [0, 136, 255],
    [0, 140, 255],
    [0, 144, 255],
    [0, 148, 255],
    [0, 152, 255],
    [0, 156, 255],
    [0, 160, 255],
    [0, 164, 255],
    [0, 168, 255],
    [0, 172, 255],
    [0, 176, 255],
    [0, 180, 255],
    [0, 184, 255],
    [0, 188, 255],
    [0, 192, 255],
    [0, 196, 255],
    [0, 200, 255],
    [0, 204, 255],
    [0, 208, 255],
    [0, 212, 255],
    [0, 216, 255],
    [0, 220, 254],
    [0, 224, 251],
    [0, 228, 248],
    [2, 232, 244],
    [6, 236, 241],
    [9, 240, 238],
    [12, 244, 235],
    [15, 248, 231],
    [19, 252, 228],
    [22, 255, 225],
    [25, 255, 222],
    [28, 255, 219],
    [31, 255, 215],
    [35, 255, 212],
    [38, 255, 209],
    [41, 255, 206],
    [44, 255, 202],
    [48, 255, 199],
    [51, 255, 196],
    [54, 255, 193],
    [57, 255, 190],
    [60, 255, 186],
    [64, 255, 183],
    [67, 255, 180],
    [70, 255, 177],
    [73, 255, 173],
    [77, 255, 170],
    [80, 255, 167],
    [83, 255, 164],
    [86, 255, 160],
    [90, 255, 157],
    [93, 255, 154],
    [96, 255, 151],
    [99, 255, 148],
    [102, 255, 144],
    [106, 255, 141],
    [109, 255, 138],
    [112, 255, 135],
    [115, 255, 131],
    [119, 255, 128],
    [122, 255, 125],
    [125, 255, 122],
    [128, 255, 119],
    [131, 255, 115],
    [135, 255, 112],
    [138, 255, 109],
    [141, 255, 106],
    [144, 255, 102],
    [148, 255, 99],
    [151, 255, 96],
    [154, 255, 93],
    [157, 255, 90],
    [160, 255, 86],
    [164, 255, 83],
    [167, 255, 80],
    [170, 255, 77],
    [173, 255, 73],
    [177, 255, 70],
    [180, 255, 67],
    [183, 255, 64],
    [186, 255, 60],
    [190, 255, 57],
    [193, 255, 54],
    [196, 255, 51],
    [199, 255, 48],
    [202, 255, 44],
    [206, 255, 41],
    [209, 255, 38],
    [212, 255, 35],
    [215, 255, 31],
    [219, 255, 28],
    [222, 255, 25],
    [225, 255, 22],
    [228, 255, 19],
    [231, 255, 15],
    [235, 255, 12],
    [238, 255, 9],
    [241, 252, 6],
    [244, 248, 2],
    [248, 245, 0],
    [251, 241, 0],
    [254, 237, 0],
    [255, 234, 0],
    [255, 230, 0],
    [255, 226, 0],
    [255, 222, 0],
    [255, 219, 0],
    [255, 215, 0],
    [255, 211, 0],
    [255, 208, 0],
    [255, 204, 0],
    [255, 200, 0],
    [255, 196, 0],
    [255, 193, 0],
    [255, 189, 0],
    [255, 185, 0],
    [255, 182, 0],
    [255, 178, 0],
    [255, 174, 0],
    [255, 171, 0],
    [255, 167, 0],
    [255, 163, 0],
    [255, 159, 0],
    [255, 156, 0],
    [255, 152, 0],
    [255, 148, 0],
    [255, 145, 0],
    [255, 141, 0],
    [255, 137, 0],
    [255, 134, 0],
    [255, 130, 0],
    [255, 126, 0],
    [255, 122, 0],
    [255, 119, 0],
    [255, 115, 0],
    [255, 111, 0],
    [255, 108, 0],
    [255, 104, 0],
    [255, 100, 0],
    [255, 96, 0],
    [255, 93, 0],
    [255, 89, 0],
    [255, 85, 0],
    [255, 82, 0],
    [255, 78, 0],
    [255, 74, 0],
    [255, 71, 0],
    [255, 67, 0],
    [255, 63, 0],
    [255, 59, 0],
    [255, 56, 0],
    [255, 52, 0],
    [255, 48, 0],
    [255, 45, 0],
    [255, 41, 0],
    [255, 37, 0],
    [255, 34, 0],
    [255, 30, 0],
    [255, 26, 0],
    [255, 22, 0],
    [255, 19, 0],
    [250, 15, 0],
    [246, 11, 0],
    [241, 8, 0],
    [237, 4, 0],
    [232, 0, 0],
    [228, 0, 0],
    [223, 0, 0],
    [218, 0, 0],
    [214, 0, 0],
    [209, 0, 0],
    [205, 0, 0],
    [200, 0, 0],
    [196, 0, 0],
    [191, 0, 0],
    [187, 0, 0],
    [182, 0, 0],
    [178, 0, 0],
    [173, 0, 0],
    [168, 0, 0],
    [164, 0, 0],
    [159, 0, 0],
    [155, 0, 0],
    [150, 0, 0],
    [146, 0, 0],
    [141, 0, 0],
    [137, 0, 0],
    [132, 0, 0],
    [128, 0, 0],
];
