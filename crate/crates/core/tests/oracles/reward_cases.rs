//! Reward values computed by a separate script from the vehicle lists below,
//! without going through the crate, then frozen.

/// One constructed world: phase before and after the decision, and vehicles
/// as `(lane row, position m, speed m/s, waiting s)`.
pub struct RewardCase {
    pub prev: u8,
    pub action: u8,
    pub vehicles: &'static [(u8, f64, f64, f64)],
    /// action term, stopped count, mean wait, balance, total
    pub want: [f64; 5],
}

pub const REWARD_CASES: &[RewardCase] = &[
    RewardCase { prev: 0, action: 0, vehicles: &[], want: [0.0, 0.0, 0.0, 0.0, 0.0] },
    RewardCase { prev: 2, action: 5, vehicles: &[], want: [-5.0, 0.0, 0.0, 0.0, -5.0] },
    RewardCase { prev: 1, action: 1, vehicles: &[(0, 290.0, 0.0, 7.0), (0, 280.0, 0.0, 3.0), (1, 290.0, 0.0, 7.0), (1, 280.0, 0.0, 3.0), (2, 290.0, 0.0, 7.0), (2, 280.0, 0.0, 3.0), (6, 290.0, 0.0, 7.0), (6, 280.0, 0.0, 3.0), (7, 290.0, 0.0, 7.0), (7, 280.0, 0.0, 3.0), (8, 290.0, 0.0, 7.0), (8, 280.0, 0.0, 3.0), (12, 290.0, 0.0, 7.0), (12, 280.0, 0.0, 3.0), (13, 290.0, 0.0, 7.0), (13, 280.0, 0.0, 3.0), (14, 290.0, 0.0, 7.0), (14, 280.0, 0.0, 3.0), (18, 290.0, 0.0, 7.0), (18, 280.0, 0.0, 3.0), (19, 290.0, 0.0, 7.0), (19, 280.0, 0.0, 3.0), (20, 290.0, 0.0, 7.0), (20, 280.0, 0.0, 3.0)], want: [0.0, 24.0, 5.0, 0.0, -26.5] },
    RewardCase { prev: 3, action: 4, vehicles: &[(0, 100.0, 5.0, 0.0), (7, 50.0, 13.0, 0.0), (14, 200.0, 0.1, 4.0)], want: [-5.0, 0.0, 0.0, 0.0, -5.0] },
    RewardCase { prev: 6, action: 6, vehicles: &[(13, 295.0, 0.0, 41.0)], want: [0.0, 1.0, 41.0, -0.018333333333333333, -21.514666666666667] },
    RewardCase { prev: 0, action: 7, vehicles: &[(3, 10.0, 0.0, 2.0), (10, 40.0, 0.05, 9.0)], want: [-5.0, 2.0, 5.5, 0.0, -9.75] },
    RewardCase { prev: 2, action: 6, vehicles: &[(5, 29.07, 0.1, 0.0), (16, 79.39, 2.309, 12.0), (20, 189.74, 0.0, 381.0), (19, 139.27, 7.825, 12.0), (20, 106.12, 0.0, 220.0), (20, 124.09, 0.1, 0.0), (21, 208.07, 0.1, 12.0), (10, 271.1, 0.0, 129.0), (16, 159.1, 0.0999, 228.0), (15, 22.9, 0.0, 81.0), (9, 186.03, 0.0999, 176.0), (19, 178.59, 0.0, 165.0), (2, 103.01, 0.0, 197.0), (22, 202.76, 0.0, 208.0), (16, 34.07, 0.1, 0.0), (10, 95.64, 0.1, 12.0), (19, 130.06, 0.0999, 331.0), (0, 132.89, 0.0999, 221.0), (1, 202.63, 0.05, 353.0), (20, 294.34, 0.0999, 379.0), (12, 119.15, 0.1, 0.0), (23, 57.81, 0.0, 189.0), (11, 0.51, 0.0, 269.0), (22, 70.69, 0.1, 12.0), (7, 163.11, 0.05, 102.0), (15, 24.15, 0.0, 53.0), (0, 210.54, 9.555, 12.0), (20, 164.06, 0.0999, 33.0), (19, 7.38, 0.05, 362.0)], want: [-5.0, 19.0, 214.57894736842104, -0.37833333333333335, -131.59214035087717] },
    RewardCase { prev: 5, action: 5, vehicles: &[(17, 57.26, 0.0, 343.0), (5, 251.9, 0.0, 334.0), (4, 52.08, 0.05, 207.0), (11, 267.9, 0.0999, 326.0), (18, 97.86, 0.0999, 315.0), (19, 155.82, 5.412, 0.0), (13, 220.61, 0.0999, 276.0), (19, 101.99, 0.0999, 355.0), (3, 107.8, 0.0999, 217.0), (3, 174.05, 0.0, 19.0), (5, 114.92, 0.1, 12.0), (1, 21.82, 13.272, 0.0), (9, 105.49, 0.1, 0.0), (3, 68.09, 0.0999, 130.0), (6, 102.74, 0.05, 200.0), (12, 275.67, 0.0, 273.0), (18, 119.14, 0.0, 201.0), (1, 125.89, 0.1, 12.0), (1, 113.53, 0.05, 32.0), (13, 195.15, 0.0, 141.0), (15, 273.93, 0.05, 71.0), (20, 82.01, 0.1, 0.0), (13, 77.91, 10.664, 0.0), (16, 235.19, 0.1, 0.0), (16, 176.6, 0.0, 205.0), (23, 5.83, 12.88, 0.0), (19, 111.12, 0.05, 283.0), (15, 103.32, 0.0, 38.0)], want: [0.0, 19.0, 208.73684210526315, -0.165, -123.50042105263158] },
    RewardCase { prev: 5, action: 5, vehicles: &[(10, 104.01, 9.461, 0.0), (4, 16.44, 0.0, 305.0), (0, 128.5, 0.0999, 244.0), (3, 9.1, 13.089, 0.0), (17, 49.86, 0.05, 95.0), (6, 285.7, 0.05, 237.0), (7, 1.09, 0.0, 213.0), (4, 294.03, 0.05, 252.0), (22, 271.71, 0.0, 27.0), (13, 93.08, 4.065, 0.0), (12, 70.98, 0.05, 233.0), (23, 231.09, 0.0999, 215.0), (21, 72.82, 0.0, 27.0), (5, 80.67, 0.05, 20.0), (6, 123.81, 0.1, 0.0), (18, 225.19, 0.0, 177.0), (18, 134.05, 0.05, 122.0), (1, 67.43, 0.0, 51.0), (8, 32.96, 0.0999, 354.0), (17, 148.15, 5.626, 0.0)], want: [0.0, 15.0, 171.46666666666667, -0.09333333333333335, -100.808] },
    RewardCase { prev: 5, action: 5, vehicles: &[(1, 257.92, 0.0, 10.0), (11, 241.54, 0.0, 34.0), (17, 49.86, 0.05, 220.0), (22, 34.7, 0.0, 376.0), (8, 280.76, 0.05, 140.0), (19, 184.43, 0.05, 187.0), (9, 290.74, 4.81, 12.0), (19, 168.19, 0.0, 32.0), (19, 127.24, 0.05, 351.0), (20, 53.71, 0.0, 265.0), (20, 33.86, 0.0999, 142.0), (13, 207.18, 0.0, 88.0), (19, 45.01, 0.05, 146.0), (6, 184.13, 0.0, 354.0), (23, 213.24, 0.05, 245.0), (0, 107.89, 0.0, 250.0), (16, 203.8, 1.121, 12.0), (1, 43.72, 0.0, 325.0), (9, 238.53, 0.1, 12.0), (23, 241.15, 0.05, 273.0), (0, 145.12, 0.0, 132.0), (5, 231.93, 0.1, 12.0), (13, 198.49, 0.0, 135.0), (9, 16.96, 0.0999, 135.0), (23, 160.59, 0.0999, 156.0), (10, 164.67, 10.546, 12.0), (8, 45.45, 0.0, 128.0), (14, 126.34, 0.0, 178.0), (23, 262.52, 0.05, 160.0), (7, 162.37, 0.0999, 351.0), (8, 126.15, 0.1, 0.0), (21, 120.35, 0.0, 290.0), (23, 248.75, 0.0, 124.0), (15, 21.62, 0.0999, 232.0)], want: [0.0, 28.0, 194.96428571428572, -0.2983333333333333, -125.72080952380952] },
    RewardCase { prev: 2, action: 4, vehicles: &[(20, 203.66, 0.0, 286.0), (1, 64.04, 0.0, 50.0), (21, 196.81, 0.1, 0.0), (15, 177.35, 4.207, 0.0), (23, 184.16, 0.0, 79.0), (1, 91.59, 12.736, 12.0), (22, 117.97, 0.0, 43.0), (16, 17.43, 0.0, 159.0), (3, 280.73, 0.0, 101.0), (16, 272.46, 0.05, 107.0), (13, 61.88, 7.767, 12.0), (18, 85.72, 0.0999, 344.0), (6, 5.92, 2.441, 12.0), (19, 294.69, 0.0, 386.0), (22, 11.38, 0.1, 0.0)], want: [-5.0, 9.0, 172.77777777777777, -0.053333333333333344, -100.43155555555555] },
    RewardCase { prev: 7, action: 7, vehicles: &[(14, 10.28, 0.0999, 21.0), (21, 124.74, 0.0, 33.0), (14, 81.71, 0.1, 0.0), (8, 34.49, 0.1, 0.0), (14, 25.51, 0.0, 315.0), (11, 174.02, 0.1, 0.0), (18, 231.39, 0.0, 341.0), (19, 269.96, 0.0, 14.0), (8, 184.5, 0.1, 0.0), (20, 222.35, 0.1, 0.0), (21, 173.33, 0.05, 146.0), (14, 94.55, 0.0999, 333.0), (18, 280.71, 0.05, 276.0), (17, 146.07, 0.1, 12.0), (12, 133.71, 0.05, 260.0), (7, 236.01, 0.05, 40.0), (13, 242.87, 0.0999, 387.0), (13, 5.17, 0.05, 338.0), (20, 133.55, 0.1, 0.0), (7, 157.97, 0.05, 386.0), (2, 143.46, 0.1, 0.0), (0, 251.59, 0.0999, 361.0), (7, 136.66, 13.709, 12.0), (5, 50.65, 0.0999, 125.0), (19, 188.45, 0.0, 357.0), (6, 241.6, 0.0, 137.0), (17, 267.16, 0.0, 279.0)], want: [0.0, 18.0, 230.5, -0.2333333333333333, -133.43666666666667] },
    RewardCase { prev: 1, action: 1, vehicles: &[(13, 68.65, 0.1, 0.0), (8, 268.56, 0.0999, 279.0), (11, 247.7, 11.977, 0.0), (2, 68.72, 0.0, 61.0), (2, 267.04, 0.0, 84.0), (3, 205.67, 0.0, 276.0), (7, 199.96, 0.0999, 184.0), (15, 43.64, 0.0, 2.0), (6, 1.78, 0.1, 12.0)], want: [0.0, 6.0, 147.66666666666666, -0.09333333333333334, -79.908] },
    RewardCase { prev: 2, action: 2, vehicles: &[(23, 77.86, 0.0999, 317.0), (3, 34.2, 0.05, 139.0), (2, 220.72, 0.0999, 310.0), (15, 35.05, 0.0, 288.0), (18, 195.68, 0.0, 310.0), (10, 255.53, 0.05, 349.0), (17, 276.97, 0.0, 140.0), (18, 172.87, 0.0999, 195.0), (2, 263.76, 0.1, 12.0), (5, 222.59, 0.1, 0.0), (21, 169.41, 0.0, 261.0), (20, 29.12, 0.0999, 225.0), (23, 187.6, 0.1, 0.0), (19, 94.99, 0.0, 264.0), (13, 11.45, 0.0999, 342.0), (20, 221.75, 0.0999, 283.0)], want: [0.0, 13.0, 263.3076923076923, -0.13833333333333334, -144.76451282051283] },
    RewardCase { prev: 4, action: 4, vehicles: &[(20, 89.03, 0.0, 67.0), (0, 228.29, 0.1, 0.0), (23, 175.12, 0.0, 307.0), (5, 288.2, 0.05, 285.0), (23, 1.21, 0.0999, 178.0), (5, 99.89, 0.0, 113.0), (15, 261.63, 0.05, 103.0), (19, 91.92, 0.05, 21.0), (17, 141.1, 0.05, 214.0), (0, 49.9, 0.0, 91.0), (13, 284.77, 0.0, 326.0), (11, 100.19, 0.05, 375.0), (10, 161.5, 2.508, 0.0), (21, 174.87, 0.05, 345.0), (18, 281.25, 0.0, 155.0), (21, 240.03, 0.0, 339.0), (19, 90.26, 0.0, 199.0), (17, 230.08, 0.05, 251.0), (5, 142.95, 0.0, 354.0), (8, 217.13, 0.0, 331.0), (2, 195.75, 0.0, 134.0), (22, 61.13, 0.05, 99.0), (11, 97.42, 0.05, 143.0), (1, 252.59, 0.0, 234.0), (9, 61.91, 0.0999, 156.0), (20, 29.64, 0.0, 146.0), (20, 132.17, 0.0999, 279.0), (6, 92.04, 0.05, 181.0), (0, 23.69, 0.0999, 107.0), (18, 124.4, 0.0, 195.0), (10, 43.47, 0.0999, 375.0), (3, 178.46, 0.0, 175.0), (17, 187.91, 0.1, 0.0), (0, 267.77, 0.0, 105.0), (6, 240.16, 0.0, 81.0), (18, 243.79, 0.05, 346.0)], want: [0.0, 33.0, 206.36363636363637, -0.2983333333333333, -136.42048484848485] },
    RewardCase { prev: 4, action: 4, vehicles: &[(2, 125.29, 0.0, 329.0), (21, 91.2, 6.484, 0.0)], want: [0.0, 1.0, 329.0, -0.018333333333333333, -165.51466666666667] },
    RewardCase { prev: 6, action: 3, vehicles: &[(11, 195.83, 0.05, 289.0), (20, 140.55, 11.856, 0.0), (14, 144.85, 0.0999, 148.0), (18, 5.66, 0.0999, 282.0), (2, 241.55, 0.0999, 345.0), (1, 171.71, 0.0, 41.0), (18, 83.83, 0.0999, 100.0), (8, 183.2, 0.05, 388.0), (23, 88.96, 0.0, 315.0), (0, 59.04, 0.0999, 2.0), (9, 85.33, 12.118, 0.0)], want: [-5.0, 9.0, 212.22222222222223, -0.09833333333333333, -120.18977777777778] },
    RewardCase { prev: 4, action: 4, vehicles: &[(16, 109.08, 0.0, 392.0), (8, 232.94, 0.0, 329.0), (13, 75.48, 0.0, 365.0), (18, 63.57, 0.0999, 47.0), (14, 292.22, 0.05, 63.0), (21, 178.93, 0.0999, 313.0), (19, 159.75, 5.677, 0.0), (22, 190.9, 0.0999, 262.0), (2, 166.51, 0.1, 12.0), (6, 236.92, 0.1, 0.0), (2, 103.04, 0.1, 0.0), (6, 195.83, 0.0, 321.0), (16, 15.8, 0.1, 0.0), (8, 21.62, 5.678, 12.0), (23, 63.64, 0.0, 153.0), (20, 77.05, 0.1, 0.0), (11, 165.87, 8.596, 0.0), (19, 278.68, 0.0, 108.0), (6, 250.22, 0.1, 0.0), (23, 159.01, 8.274, 12.0), (19, 235.15, 1.398, 0.0), (18, 270.49, 0.05, 281.0), (7, 20.76, 0.1, 12.0), (3, 159.47, 0.1, 0.0), (0, 92.26, 0.0, 200.0), (18, 29.19, 0.05, 150.0)], want: [0.0, 13.0, 229.53846153846155, -0.165, -127.90123076923078] },
    RewardCase { prev: 2, action: 3, vehicles: &[(3, 272.8, 0.0999, 207.0), (10, 88.18, 0.05, 150.0), (15, 272.23, 0.0999, 219.0), (0, 38.35, 0.1, 0.0), (21, 221.62, 13.619, 0.0), (15, 182.94, 12.958, 0.0), (0, 290.71, 0.0, 121.0), (3, 240.0, 13.169, 12.0), (1, 82.53, 0.0, 292.0), (2, 207.69, 0.0, 388.0), (13, 280.1, 0.0, 133.0), (17, 31.33, 13.78, 12.0), (10, 20.84, 0.0, 162.0), (11, 125.38, 0.05, 209.0), (20, 182.36, 3.742, 0.0), (9, 237.58, 8.142, 12.0), (23, 285.27, 0.0999, 291.0), (4, 73.76, 0.0, 390.0), (18, 99.22, 0.1, 0.0), (5, 271.3, 0.0, 213.0), (2, 221.78, 0.05, 166.0), (6, 103.09, 0.0, 345.0), (0, 30.2, 0.05, 292.0), (4, 93.38, 2.338, 12.0), (4, 219.35, 5.87, 0.0), (2, 93.63, 0.1, 12.0), (3, 57.83, 1.699, 12.0), (6, 138.04, 2.388, 0.0), (0, 1.31, 0.0, 278.0), (3, 80.17, 0.0, 230.0), (18, 192.83, 0.0999, 311.0), (10, 159.98, 0.1, 0.0), (7, 278.12, 0.0, 24.0), (18, 185.57, 1.571, 12.0), (20, 126.07, 0.0999, 89.0), (6, 117.24, 4.253, 0.0), (17, 71.67, 0.0, 371.0), (21, 290.25, 7.505, 12.0)], want: [-5.0, 21.0, 232.42857142857142, -0.1783333333333334, -142.35695238095238] },
    RewardCase { prev: 3, action: 3, vehicles: &[(0, 277.21, 0.0, 111.0), (7, 186.23, 0.0999, 125.0), (6, 244.39, 0.05, 124.0), (8, 114.72, 0.0999, 223.0), (9, 152.27, 0.05, 125.0), (19, 282.2, 0.0, 351.0), (20, 111.32, 0.0999, 167.0), (16, 139.95, 4.713, 0.0)], want: [0.0, 7.0, 175.14285714285714, -0.060000000000000005, -94.61942857142857] },
    RewardCase { prev: 2, action: 2, vehicles: &[(10, 5.94, 0.0, 255.0), (11, 17.0, 0.0999, 195.0), (12, 43.31, 0.0, 153.0), (12, 232.45, 0.1, 12.0), (7, 0.32, 0.1, 12.0), (23, 254.58, 0.0, 351.0), (6, 221.49, 3.949, 0.0), (19, 203.4, 0.1, 12.0)], want: [0.0, 4.0, 238.5, -0.018333333333333333, -123.26466666666667] },
    RewardCase { prev: 4, action: 4, vehicles: &[(2, 189.58, 0.0, 380.0), (9, 155.53, 0.0999, 200.0), (22, 183.62, 6.275, 0.0), (7, 126.17, 0.0999, 3.0), (7, 144.11, 0.0, 51.0), (8, 101.13, 1.489, 0.0), (2, 94.5, 0.0, 290.0), (17, 224.73, 12.348, 0.0), (7, 45.63, 0.05, 164.0), (20, 178.82, 0.0999, 278.0), (10, 43.24, 3.003, 12.0), (10, 247.4, 0.0, 8.0), (4, 33.21, 0.05, 224.0), (17, 75.88, 0.1, 0.0), (19, 69.47, 0.1, 0.0), (2, 175.5, 0.0, 257.0), (3, 245.21, 0.0999, 189.0), (7, 122.27, 0.1, 12.0), (16, 224.33, 0.0, 73.0), (23, 79.77, 0.918, 0.0), (18, 6.75, 0.0, 179.0), (13, 81.83, 0.0, 288.0), (18, 255.02, 0.05, 270.0), (9, 171.32, 8.939, 0.0), (22, 48.99, 0.0, 160.0), (10, 189.0, 0.0, 388.0), (6, 162.99, 0.05, 71.0)], want: [0.0, 18.0, 192.94444444444446, -0.29833333333333334, -114.71088888888889] },
    RewardCase { prev: 6, action: 6, vehicles: &[(7, 230.75, 0.0, 5.0), (19, 32.69, 0.1, 0.0), (3, 154.4, 0.0999, 268.0), (1, 245.46, 0.0, 156.0), (13, 104.44, 0.0999, 181.0), (23, 7.61, 11.082, 12.0), (11, 199.17, 0.0999, 319.0), (20, 201.66, 0.1, 0.0), (1, 2.62, 0.05, 345.0), (23, 242.9, 13.378, 12.0), (20, 87.1, 0.0999, 183.0), (10, 233.79, 0.1, 0.0), (21, 0.72, 0.0, 251.0), (3, 105.9, 0.1, 0.0), (19, 279.27, 0.05, 157.0), (14, 165.18, 0.0, 96.0), (13, 97.03, 0.05, 349.0), (13, 230.1, 10.784, 12.0), (18, 56.52, 0.05, 270.0), (12, 42.4, 0.0, 214.0), (3, 241.83, 0.0, 20.0), (22, 85.19, 0.05, 220.0), (12, 156.07, 2.809, 0.0)], want: [0.0, 15.0, 202.26666666666668, -0.1133333333333333, -116.224] },
    RewardCase { prev: 3, action: 3, vehicles: &[(12, 50.89, 0.0, 378.0), (20, 256.99, 9.028, 12.0), (23, 104.23, 0.1, 12.0)], want: [0.0, 1.0, 378.0, -0.018333333333333333, -190.01466666666667] },
];

/// Stopped counts on the 12 incoming lanes and the expected balance term.
pub const BALANCE_CASES: &[([usize; 12], f64)] = &[
    ([3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3], 0.0),
    ([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], 0.0),
    ([6, 6, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], -1.2000000000000002),
    ([4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], -0.29333333333333333),
    ([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12], -2.8600000000000003),
    ([0, 0, 0, 5, 5, 5, 0, 0, 0, 5, 5, 5], -1.5),
    ([2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 3], -0.01833333333333325),
];
